// Copyright 2026 The AutoAnsatz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>

#include "doctest.h"

#include "autoansatz/ansatz.hpp"
#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace autoansatz;

namespace {

int distinct_variational_slots(const Circuit &c) {
    std::set<int> seen;
    for (const auto &g : c.gates())
        if (g.slot.kind == SlotKind::Variational) seen.insert(g.slot.index);
    return static_cast<int>(seen.size());
}

int distinct_embedding_slots(const Circuit &c) {
    std::set<int> seen;
    for (const auto &g : c.gates())
        if (g.slot.kind == SlotKind::Embedding) seen.insert(g.slot.index);
    return static_cast<int>(seen.size());
}

} // namespace

TEST_CASE("parameter counts pinned by construction") {
    CHECK(count_params(VariationalKind::S2D, 10, 1) == 18);
    CHECK(count_params(VariationalKind::MPS, 10, 3) == 54);
    CHECK(count_params(VariationalKind::StronglyEntangling, 5, 1) == 15);
    CHECK(count_params(VariationalKind::BasicEntangler, 5, 2) == 10);
    CHECK(count_params(VariationalKind::TTN, 7, 2) == 24);
    CHECK(count_params(VariationalKind::QAOA, 5, 1) == 10);
    CHECK(count_params(VariationalKind::QAOA, 2, 1) == 3); // degenerate single coupler
    CHECK(count_params(VariationalKind::Random, 9, 4) == 36);
}

TEST_CASE("embedding slot counts") {
    AnsatzSpec spec;
    spec.num_qubits = 10;
    CHECK(embed_count(spec) == 10);
    spec.embedding = EmbeddingKind::IQP;
    spec.num_qubits = 5;
    CHECK(embed_count(spec) == 15);
    spec.num_qubits = 2;
    CHECK(embed_count(spec) == 3);
}

TEST_CASE("built circuits reference exactly the advertised slots") {
    for (int e = 0; e < kNumEmbeddingKinds; ++e) {
        for (int v = 0; v < kNumVariationalKinds; ++v) {
            for (int n : {5, 8, 11, 15}) {
                for (int L : {1, 3, 5}) {
                    AnsatzSpec spec;
                    spec.embedding = static_cast<EmbeddingKind>(e);
                    spec.variational = static_cast<VariationalKind>(v);
                    spec.num_qubits = n;
                    spec.num_layers = L;
                    spec.structure_seed = 99;
                    const Circuit c = build_circuit(spec);
                    CAPTURE(embedding_name(spec.embedding));
                    CAPTURE(variational_name(spec.variational));
                    CAPTURE(n);
                    CAPTURE(L);
                    CHECK(c.variational_slot_count() == count_params(spec.variational, n, L));
                    CHECK(distinct_variational_slots(c) == c.variational_slot_count());
                    CHECK(c.embedding_slot_count() == embed_count(spec));
                    CHECK(distinct_embedding_slots(c) == c.embedding_slot_count());
                }
            }
        }
    }
}

TEST_CASE("zero angles with angle embedding read all ones") {
    for (auto kind : {VariationalKind::S2D, VariationalKind::MPS, VariationalKind::TTN,
                      VariationalKind::BasicEntangler}) {
        AnsatzSpec spec;
        spec.variational = kind;
        spec.num_qubits = 6;
        spec.num_layers = 2;
        const Circuit c = build_circuit(spec);
        const std::vector<double> theta(static_cast<std::size_t>(c.variational_slot_count()), 0.0);
        const std::vector<double> x(static_cast<std::size_t>(c.embedding_slot_count()), 0.0);
        for (double r : run_circuit(c, theta, x)) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("random template is determined by its structure seed") {
    AnsatzSpec spec;
    spec.variational = VariationalKind::Random;
    spec.num_qubits = 7;
    spec.num_layers = 3;
    spec.structure_seed = 1234;
    const Circuit a = build_circuit(spec);
    const Circuit b = build_circuit(spec);
    REQUIRE(a.gates().size() == b.gates().size());
    for (std::size_t i = 0; i < a.gates().size(); ++i) {
        CHECK(a.gates()[i].kind == b.gates()[i].kind);
        CHECK(a.gates()[i].wire0 == b.gates()[i].wire0);
        CHECK(a.gates()[i].wire1 == b.gates()[i].wire1);
        CHECK(a.gates()[i].slot.index == b.gates()[i].slot.index);
    }

    spec.structure_seed = 1235;
    const Circuit other = build_circuit(spec);
    bool differs = other.gates().size() != a.gates().size();
    for (std::size_t i = 0; !differs && i < a.gates().size(); ++i)
        differs = a.gates()[i].kind != other.gates()[i].kind ||
                  a.gates()[i].wire0 != other.gates()[i].wire0;
    CHECK(differs);
}

TEST_CASE("two s2d layers are not degenerate with one") {
    Rng rng(17);
    AnsatzSpec one;
    one.num_qubits = 5;
    one.num_layers = 1;
    AnsatzSpec two = one;
    two.num_layers = 2;
    const Circuit c1 = build_circuit(one);
    const Circuit c2 = build_circuit(two);
    const auto x = testutil::random_angles(c1.embedding_slot_count(), rng);
    const auto theta2 = testutil::random_angles(c2.variational_slot_count(), rng);
    const std::vector<double> theta1(theta2.begin(),
                                     theta2.begin() + c1.variational_slot_count());
    const auto r1 = run_circuit(c1, theta1, x);
    const auto r2 = run_circuit(c2, theta2, x);
    double diff = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) diff += std::abs(r1[i] - r2[i]);
    CHECK(diff > 1e-6);
}

TEST_CASE("s2d circuit matches the dense oracle") {
    Rng rng(23);
    AnsatzSpec spec;
    spec.num_qubits = 4;
    spec.num_layers = 1;
    const Circuit c = build_circuit(spec);
    for (int rep = 0; rep < 5; ++rep) {
        const auto theta = testutil::random_angles(c.variational_slot_count(), rng);
        const auto x = testutil::random_angles(c.embedding_slot_count(), rng);
        StateVector state = StateVector::zero_state(4);
        run_circuit_state(c, theta, x, state);
        const auto dense = oracle::run_dense(c, theta, x);
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(std::abs(dense[i] - state.amps[i]) <= 1e-10);
    }
}

TEST_CASE("spec validation") {
    AnsatzSpec spec;
    spec.num_qubits = 1;
    CHECK_THROWS_AS(build_circuit(spec), std::invalid_argument);
    spec.num_qubits = 5;
    spec.num_layers = 0;
    CHECK_THROWS_AS(build_circuit(spec), std::invalid_argument);
    spec.num_qubits = 21;
    spec.num_layers = 1;
    CHECK_THROWS_AS(build_circuit(spec), std::invalid_argument);
}

TEST_CASE("kind names round-trip") {
    for (int v = 0; v < kNumVariationalKinds; ++v) {
        const auto kind = static_cast<VariationalKind>(v);
        CHECK(parse_variational(variational_name(kind)) == kind);
    }
    CHECK(parse_embedding("angle") == EmbeddingKind::Angle);
    CHECK(parse_embedding("iqp") == EmbeddingKind::IQP);
    CHECK_THROWS_AS(parse_variational("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_embedding(""), std::invalid_argument);
}

TEST_CASE("iqp pair slots are laid out lexicographically") {
    const int n = 5;
    int expected = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) CHECK(iqp_pair_slot(n, i, j) == expected++);
    CHECK(iqp_pair_slot(n, 3, 1) == iqp_pair_slot(n, 1, 3));
}
