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

#include <cmath>
#include <numbers>

#include "doctest.h"

#include "autoansatz/statevector.hpp"
#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace autoansatz;
constexpr double pi = std::numbers::pi;

TEST_CASE("ry(pi) flips |0> to |1>") {
    auto s = StateVector::zero_state(1);
    apply_gate(s, {GateKind::RY, 0}, pi);
    CHECK(std::abs(s.amps[0]) < 1e-12);
    CHECK(std::abs(s.amps[1] - Complex{1, 0}) < 1e-12);
}

TEST_CASE("wire 0 is the most significant index bit") {
    auto s = StateVector::zero_state(2);
    apply_gate(s, {GateKind::RY, 0}, pi); // |00> -> |10>
    CHECK(std::abs(s.amps[2] - Complex{1, 0}) < 1e-12);
    s = StateVector::zero_state(2);
    apply_gate(s, {GateKind::RY, 1}, pi); // |00> -> |01>
    CHECK(std::abs(s.amps[1] - Complex{1, 0}) < 1e-12);
}

TEST_CASE("cz phase convention") {
    auto s = StateVector::zero_state(2);
    apply_gate(s, {GateKind::RY, 0}, pi);
    apply_gate(s, {GateKind::RY, 1}, pi); // |11>
    apply_gate(s, {GateKind::CZ, 0, 1});
    CHECK(s.amps[3].real() == doctest::Approx(-1.0).epsilon(1e-12));

    s = StateVector::zero_state(2);
    apply_gate(s, {GateKind::RY, 0}, pi); // |10>
    apply_gate(s, {GateKind::CZ, 0, 1});
    CHECK(s.amps[2].real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cnot maps |10> to |11>") {
    auto s = StateVector::zero_state(2);
    apply_gate(s, {GateKind::RY, 0}, pi);
    apply_gate(s, {GateKind::CNOT, 0, 1});
    CHECK(std::abs(s.amps[3] - Complex{1, 0}) < 1e-12);
}

TEST_CASE("expect_z eigenvalues and single-qubit identity") {
    auto s = StateVector::zero_state(1);
    CHECK(expect_z(s, 0) == doctest::Approx(1.0));
    apply_gate(s, {GateKind::RY, 0}, pi);
    CHECK(expect_z(s, 0) == doctest::Approx(-1.0));

    for (double t : {0.0, pi / 4, pi / 2, pi}) {
        auto q = StateVector::zero_state(1);
        apply_gate(q, {GateKind::RY, 0}, t);
        CHECK(std::abs(expect_z(q, 0) - std::cos(t)) < 1e-12);
    }
}

TEST_CASE("ghz state has zero z expectations on every wire") {
    auto s = StateVector::zero_state(3);
    apply_gate(s, {GateKind::H, 0});
    apply_gate(s, {GateKind::CNOT, 0, 1});
    apply_gate(s, {GateKind::CNOT, 1, 2});
    for (int w = 0; w < 3; ++w) CHECK(std::abs(expect_z(s, w)) < 1e-12);

    // cross-check the full state against the dense oracle
    Circuit c(3, 0, 0);
    c.add({GateKind::H, 0});
    c.add({GateKind::CNOT, 0, 1});
    c.add({GateKind::CNOT, 1, 2});
    const auto dense = oracle::run_dense(c, {}, {});
    for (std::size_t i = 0; i < dense.size(); ++i) CHECK(std::abs(dense[i] - s.amps[i]) < 1e-12);
}

TEST_CASE("random circuits match the dense oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + trial % 4;
        std::vector<double> values;
        const Circuit c = testutil::random_circuit(n, 50, rng, &values);
        StateVector state = StateVector::zero_state(n);
        run_circuit_state(c, values, {}, state);
        const auto dense = oracle::run_dense(c, values, {});
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(std::abs(dense[i] - state.amps[i]) <= 1e-10);
        const auto readouts = run_circuit(c, values, {});
        for (int w = 0; w < n; ++w)
            CHECK(std::abs(readouts[static_cast<std::size_t>(w)] -
                           oracle::z_expectation(dense, w, n)) <= 1e-10);
    }
}

TEST_CASE("norm is conserved over long random circuits") {
    Rng rng(7);
    for (int rep = 0; rep < 3; ++rep) {
        const int n = 4 + rep;
        std::vector<double> values;
        const Circuit c = testutil::random_circuit(n, 1000, rng, &values);
        StateVector state = StateVector::zero_state(n);
        run_circuit_state(c, values, {}, state);
        CHECK(std::abs(state.norm_sq() - 1.0) <= 1e-10);
    }
}

TEST_CASE("applying a gate then its inverse restores the state") {
    Rng rng(11);
    const int n = 4;
    std::vector<double> values;
    const Circuit prep = testutil::random_circuit(n, 30, rng, &values);
    StateVector reference = StateVector::zero_state(n);
    run_circuit_state(prep, values, {}, reference);

    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> angles;
        const Circuit one = testutil::random_circuit(n, 1, rng, &angles);
        StateVector s = reference;
        const Gate &g = one.gates()[0];
        if (is_parameterized(g.kind)) {
            apply_gate(s, g, angles[0]);
            apply_gate(s, g, -angles[0]);
        } else {
            apply_gate(s, g);
            apply_gate(s, g);
        }
        for (std::size_t i = 0; i < s.amps.size(); ++i)
            CHECK(std::abs(s.amps[i] - reference.amps[i]) <= 1e-10);
    }
}

TEST_CASE("readouts stay within [-1, 1]") {
    Rng rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + trial % 3;
        std::vector<double> values;
        const Circuit c = testutil::random_circuit(n, 80, rng, &values);
        for (double r : run_circuit(c, values, {})) {
            CHECK(r <= 1.0 + 1e-12);
            CHECK(r >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("zz equals its cnot-rz-cnot decomposition") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> values;
        const Circuit prep = testutil::random_circuit(3, 20, rng, &values);
        StateVector a = StateVector::zero_state(3);
        run_circuit_state(prep, values, {}, a);
        StateVector b = a;
        const double t = rng.uniform(0.0, 2 * pi);
        apply_gate(a, {GateKind::ZZ, 0, 2}, t);
        apply_gate(b, {GateKind::CNOT, 0, 2});
        apply_gate(b, {GateKind::RZ, 2}, t);
        apply_gate(b, {GateKind::CNOT, 0, 2});
        for (std::size_t i = 0; i < a.amps.size(); ++i)
            CHECK(std::abs(a.amps[i] - b.amps[i]) <= 1e-12);
    }
}

TEST_CASE("empty circuit reads all ones") {
    Circuit c(3, 0, 0);
    const auto r = run_circuit(c, {}, {});
    REQUIRE(r.size() == 3);
    for (double v : r) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("single embedded ry at pi/2 reads zero") {
    Circuit c(1, 1, 0);
    c.add({GateKind::RY, 0, -1, {SlotKind::Embedding, 0}});
    const std::vector<double> x{pi / 2};
    const auto r = run_circuit(c, {}, x);
    CHECK(std::abs(r[0]) < 1e-12);
}

TEST_CASE("argument validation") {
    auto s = StateVector::zero_state(2);
    CHECK_THROWS_AS(apply_gate(s, {GateKind::RY, 5}, 0.1), std::out_of_range);
    CHECK_THROWS_AS(apply_gate(s, {GateKind::RY, 0}), std::invalid_argument);
    CHECK_THROWS_AS(apply_gate(s, {GateKind::H, 0}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_gate(s, {GateKind::CNOT, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(expect_z(s, 2), std::out_of_range);

    Circuit c(2, 1, 1);
    c.add({GateKind::RY, 0, -1, {SlotKind::Variational, 0}});
    CHECK_THROWS_AS(run_circuit(c, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS((void)Circuit(0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(c.add({GateKind::RY, 0, -1, {SlotKind::Variational, 3}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(c.add({GateKind::CZ, 0, 1, {SlotKind::Variational, 0}}),
                    std::invalid_argument);
}
