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
#include <filesystem>

#include "doctest.h"

#include "autoansatz/model.hpp"

using namespace autoansatz;

namespace {

Dataset tiny_batch(std::uint64_t seed, int count) {
    Rng rng(seed);
    Dataset ds;
    for (int i = 0; i < count; ++i) {
        Sample s;
        for (auto &v : s.x) v = rng.normal(0.0, 1.0);
        s.label = rng.uniform_int(0, kNumClasses - 1);
        ds.rows.push_back(s);
    }
    return ds;
}

// Flattened view over all model parameters, for finite differencing.
std::vector<double *> all_params(QnnModel &m) {
    std::vector<double *> out;
    for (auto *tensor : {&m.w_in, &m.b_in, &m.theta, &m.w_out, &m.b_out})
        for (auto &v : *tensor) out.push_back(&v);
    return out;
}

std::vector<double> flatten(const QnnGrads &g) {
    std::vector<double> out;
    for (const auto *tensor : {&g.w_in, &g.b_in, &g.theta, &g.w_out, &g.b_out})
        out.insert(out.end(), tensor->begin(), tensor->end());
    return out;
}

double batch_loss(const QnnModel &m, const Dataset &ds, const std::vector<int> &idx) {
    double total = 0.0;
    for (int i : idx) total += cross_entropy(m.logits(ds.rows[static_cast<std::size_t>(i)].x),
                                             ds.rows[static_cast<std::size_t>(i)].label);
    return total / static_cast<double>(idx.size());
}

} // namespace

TEST_CASE("zero network gives uniform softmax and ln 8 loss") {
    AnsatzSpec spec;
    spec.num_qubits = 5;
    QnnModel m(spec); // all weights zero
    std::array<double, kFeatureDim> x{};
    x.fill(0.3);
    const auto logits = m.logits(x);
    for (double v : logits) CHECK(v == doctest::Approx(0.0));
    const auto p = softmax(logits);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    CHECK(cross_entropy(logits, 3) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("forward matches a hand-composed pipeline") {
    AnsatzSpec spec;
    spec.variational = VariationalKind::MPS;
    spec.num_qubits = 5;
    spec.num_layers = 2;
    QnnModel m = QnnModel::init(spec, 77);
    const Dataset ds = tiny_batch(5, 3);
    for (const auto &row : ds.rows) {
        // independent composition using only public pieces
        std::vector<double> a(5, 0.0);
        for (int i = 0; i < 5; ++i) {
            a[static_cast<std::size_t>(i)] = m.b_in[static_cast<std::size_t>(i)];
            for (int f = 0; f < kFeatureDim; ++f)
                a[static_cast<std::size_t>(i)] +=
                    m.w_in[static_cast<std::size_t>(i) * kFeatureDim + static_cast<std::size_t>(f)] *
                    row.x[static_cast<std::size_t>(f)];
        }
        const auto r = run_circuit(m.circuit, m.theta, a);
        for (int c = 0; c < kNumClasses; ++c) {
            double expect = m.b_out[static_cast<std::size_t>(c)];
            for (int i = 0; i < 5; ++i)
                expect += m.w_out[static_cast<std::size_t>(c) * 5 + static_cast<std::size_t>(i)] *
                          r[static_cast<std::size_t>(i)];
            CHECK(m.logits(row.x)[static_cast<std::size_t>(c)] ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("trainable_count matches the layer arithmetic") {
    AnsatzSpec spec; // angle/s2d, n=10, L=1
    QnnModel m(spec);
    CHECK(m.trainable_count() == 370 + 18 + 88);
}

TEST_CASE("cross entropy closed forms and shift invariance") {
    std::array<double, kNumClasses> logits{};
    logits.fill(1.7);
    CHECK(cross_entropy(logits, 0) == doctest::Approx(std::log(8.0)).epsilon(1e-12));

    logits.fill(0.0);
    logits[2] = 10.0;
    const double expected = std::log1p(7.0 * std::exp(-10.0));
    CHECK(cross_entropy(logits, 2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cross_entropy(logits, 2) == doctest::Approx(3.2e-4).epsilon(0.01));

    std::array<double, kNumClasses> shifted{};
    Rng rng(8);
    for (auto &v : logits) v = rng.uniform(-2.0, 2.0);
    for (int c = 0; c < kNumClasses; ++c) shifted[static_cast<std::size_t>(c)] = logits[static_cast<std::size_t>(c)] + 123.456;
    for (int label = 0; label < kNumClasses; ++label)
        CHECK(std::abs(cross_entropy(logits, label) - cross_entropy(shifted, label)) < 1e-12);

    const auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("zero output layer kills the circuit gradient exactly") {
    AnsatzSpec spec;
    spec.num_qubits = 4;
    QnnModel m = QnnModel::init(spec, 3);
    std::fill(m.w_out.begin(), m.w_out.end(), 0.0);
    const Dataset ds = tiny_batch(11, 4);
    const std::vector<int> idx{0, 1, 2, 3};
    for (auto engine : {GradEngine::Adjoint, GradEngine::ParamShift}) {
        const QnnGrads g = backward(m, ds, idx, engine);
        for (double v : g.theta) CHECK(v == 0.0);
        for (double v : g.w_in) CHECK(v == 0.0);
    }
}

TEST_CASE("duplicated sample gives the same gradient as the single sample") {
    AnsatzSpec spec;
    spec.num_qubits = 4;
    QnnModel m = QnnModel::init(spec, 21);
    const Dataset ds = tiny_batch(4, 1);
    const std::vector<int> once{0};
    const std::vector<int> twice{0, 0};
    const auto g1 = flatten(backward(m, ds, once));
    const auto g2 = flatten(backward(m, ds, twice));
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
}

TEST_CASE("backward matches end-to-end finite differences") {
    const Dataset ds = tiny_batch(19, 3);
    const std::vector<int> idx{0, 1, 2};
    for (int e = 0; e < kNumEmbeddingKinds; ++e) {
        for (auto v : {VariationalKind::S2D, VariationalKind::QAOA, VariationalKind::Random}) {
            AnsatzSpec spec;
            spec.embedding = static_cast<EmbeddingKind>(e);
            spec.variational = v;
            spec.num_qubits = 5;
            spec.num_layers = 1;
            spec.structure_seed = 2;
            QnnModel m = QnnModel::init(spec, 101);

            for (auto engine : {GradEngine::Adjoint, GradEngine::ParamShift}) {
                const auto analytic = flatten(backward(m, ds, idx, engine));
                const auto params = all_params(m);
                REQUIRE(analytic.size() == params.size());
                const double h = 1e-4;
                double worst = 0.0;
                for (std::size_t p = 0; p < params.size(); ++p) {
                    const double saved = *params[p];
                    *params[p] = saved + h;
                    const double up = batch_loss(m, ds, idx);
                    *params[p] = saved - h;
                    const double down = batch_loss(m, ds, idx);
                    *params[p] = saved;
                    const double fd = (up - down) / (2.0 * h);
                    worst = std::max(worst,
                                     std::abs(analytic[p] - fd) / std::max(1.0, std::abs(fd)));
                }
                CAPTURE(embedding_name(spec.embedding));
                CAPTURE(variational_name(spec.variational));
                CHECK(worst <= 1e-4);
            }
        }
    }
}

TEST_CASE("backward rejects an empty batch and forward rejects non-finite input") {
    AnsatzSpec spec;
    spec.num_qubits = 4;
    QnnModel m = QnnModel::init(spec, 1);
    const Dataset ds = tiny_batch(2, 1);
    CHECK_THROWS_AS(backward(m, ds, {}), std::invalid_argument);
    std::array<double, kFeatureDim> bad{};
    bad[5] = std::nan("");
    CHECK_THROWS_AS(m.logits(bad), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    AnsatzSpec spec;
    spec.embedding = EmbeddingKind::IQP;
    spec.variational = VariationalKind::StronglyEntangling;
    spec.num_qubits = 6;
    spec.num_layers = 2;
    QnnModel m = QnnModel::init(spec, 1234567);
    SynthConfig dconf;
    dconf.per_class_per_session = 2;
    dconf.seed = 5;
    const Dataset ds = generate_synthetic(dconf);
    const Scaler scaler = Scaler::fit(ds);

    const auto path = std::filesystem::temp_directory_path() / "autoansatz_ckpt_test.json";
    save_checkpoint(Checkpoint::of(m, scaler, 99), path.string());
    const Checkpoint back = load_checkpoint(path.string());
    std::filesystem::remove(path);

    CHECK(back.seed == 99);
    CHECK(back.spec.num_qubits == 6);
    CHECK(back.spec.variational == VariationalKind::StronglyEntangling);
    CHECK(back.w_in == m.w_in);   // bit-exact
    CHECK(back.theta == m.theta); // bit-exact
    CHECK(back.w_out == m.w_out);
    for (int f = 0; f < kFeatureDim; ++f)
        CHECK(back.scaler.mean[static_cast<std::size_t>(f)] == scaler.mean[static_cast<std::size_t>(f)]);

    const QnnModel restored = back.restore();
    const Dataset probe = tiny_batch(3, 2);
    for (const auto &row : probe.rows)
        for (int c = 0; c < kNumClasses; ++c)
            CHECK(restored.logits(row.x)[static_cast<std::size_t>(c)] ==
                  m.logits(row.x)[static_cast<std::size_t>(c)]);
}
