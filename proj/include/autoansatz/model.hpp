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
/**
 * @file
 * The hybrid classifier: a 36 -> n linear input layer whose outputs become
 * circuit angles, the quantum circuit with per-wire Pauli-Z readout, and an
 * n -> 8 linear output layer trained with softmax cross entropy.
 *
 * With angle embedding the n input-layer activations feed the RY angles
 * directly. With IQP embedding they feed the per-qubit RZ slots and every
 * pairwise ZZ slot takes the product a_i * a_j; the product-rule chaining
 * back to the activations happens here, not in the gradients module.
 *
 * backward() supports two interchangeable engines: the parameter-shift
 * Jacobian route and the adjoint reverse sweep. They agree to float
 * round-off; adjoint is the default because its cost per sample does not
 * grow with the parameter count.
 */

#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoansatz/ansatz.hpp"
#include "autoansatz/data.hpp"
#include "autoansatz/gradients.hpp"
#include "autoansatz/json_io.hpp"
#include "autoansatz/rng.hpp"
#include "autoansatz/statevector.hpp"

namespace autoansatz {

enum class GradEngine : std::uint8_t { Adjoint, ParamShift };

struct QnnModel {
    AnsatzSpec spec;
    Circuit circuit;
    std::vector<double> w_in;  // n x 36, row-major
    std::vector<double> b_in;  // n
    std::vector<double> theta; // count_params(spec)
    std::vector<double> w_out; // 8 x n, row-major
    std::vector<double> b_out; // 8

    explicit QnnModel(const AnsatzSpec &s) : spec(s), circuit(build_circuit(s)) {
        const auto n = static_cast<std::size_t>(s.num_qubits);
        w_in.assign(n * kFeatureDim, 0.0);
        b_in.assign(n, 0.0);
        theta.assign(static_cast<std::size_t>(circuit.variational_slot_count()), 0.0);
        w_out.assign(static_cast<std::size_t>(kNumClasses) * n, 0.0);
        b_out.assign(static_cast<std::size_t>(kNumClasses), 0.0);
    }

    /// Glorot-uniform linear layers, theta uniform in [0, 2pi), zero biases,
    /// everything drawn from `seed` in a fixed order.
    static QnnModel init(const AnsatzSpec &spec, std::uint64_t seed) {
        QnnModel m(spec);
        Rng rng(derive_seed(seed, 0x1417));
        const double bound_in = std::sqrt(6.0 / (kFeatureDim + spec.num_qubits));
        for (auto &w : m.w_in) w = rng.uniform(-bound_in, bound_in);
        for (auto &t : m.theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double bound_out = std::sqrt(6.0 / (spec.num_qubits + kNumClasses));
        for (auto &w : m.w_out) w = rng.uniform(-bound_out, bound_out);
        return m;
    }

    int num_qubits() const { return spec.num_qubits; }

    long long trainable_count() const {
        return static_cast<long long>(w_in.size() + b_in.size() + theta.size() + w_out.size() +
                                      b_out.size());
    }

    /// Input-layer activations a = W_in x + b_in.
    std::vector<double> activations(const std::array<double, kFeatureDim> &x) const {
        const int n = num_qubits();
        std::vector<double> a(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double acc = b_in[static_cast<std::size_t>(i)];
            const double *row = &w_in[static_cast<std::size_t>(i) * kFeatureDim];
            for (int f = 0; f < kFeatureDim; ++f) acc += row[f] * x[static_cast<std::size_t>(f)];
            a[static_cast<std::size_t>(i)] = acc;
        }
        return a;
    }

    /// Expands activations into the embedding slot vector.
    std::vector<double> embedding_values(const std::vector<double> &a) const {
        const int n = num_qubits();
        std::vector<double> e(static_cast<std::size_t>(circuit.embedding_slot_count()));
        for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
        if (spec.embedding == EmbeddingKind::IQP)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    e[static_cast<std::size_t>(iqp_pair_slot(n, i, j))] =
                        a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
        return e;
    }

    /// Chains slot gradients back to activation gradients (product rule for
    /// the IQP pair slots).
    std::vector<double> chain_embedding_back(const std::vector<double> &a,
                                             const std::vector<double> &d_embed) const {
        const int n = num_qubits();
        std::vector<double> da(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) da[static_cast<std::size_t>(i)] = d_embed[static_cast<std::size_t>(i)];
        if (spec.embedding == EmbeddingKind::IQP)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double g = d_embed[static_cast<std::size_t>(iqp_pair_slot(n, i, j))];
                    da[static_cast<std::size_t>(i)] += g * a[static_cast<std::size_t>(j)];
                    da[static_cast<std::size_t>(j)] += g * a[static_cast<std::size_t>(i)];
                }
        return da;
    }

    std::array<double, kNumClasses> logits_from_readouts(const std::vector<double> &r) const {
        const int n = num_qubits();
        std::array<double, kNumClasses> logits{};
        for (int c = 0; c < kNumClasses; ++c) {
            double acc = b_out[static_cast<std::size_t>(c)];
            const double *row = &w_out[static_cast<std::size_t>(c) * static_cast<std::size_t>(n)];
            for (int i = 0; i < n; ++i) acc += row[i] * r[static_cast<std::size_t>(i)];
            logits[static_cast<std::size_t>(c)] = acc;
        }
        return logits;
    }

    std::array<double, kNumClasses> logits(const std::array<double, kFeatureDim> &x) const {
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("QnnModel: non-finite input");
        const auto a = activations(x);
        const auto e = embedding_values(a);
        const auto r = run_circuit(circuit, theta, e);
        return logits_from_readouts(r);
    }
};

inline std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses> &logits) {
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    std::array<double, kNumClasses> p{};
    double total = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        p[static_cast<std::size_t>(c)] = std::exp(logits[static_cast<std::size_t>(c)] - max_logit);
        total += p[static_cast<std::size_t>(c)];
    }
    for (auto &v : p) v /= total;
    return p;
}

/// Softmax cross entropy, computed in log space for shift invariance.
inline double cross_entropy(const std::array<double, kNumClasses> &logits, int label) {
    if (label < 0 || label >= kNumClasses)
        throw std::invalid_argument("cross_entropy: label out of range");
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    double total = 0.0;
    for (double v : logits) total += std::exp(v - max_logit);
    return std::log(total) - (logits[static_cast<std::size_t>(label)] - max_logit);
}

/// Gradients for every parameter tensor plus the mean loss of the batch.
struct QnnGrads {
    std::vector<double> w_in, b_in, theta, w_out, b_out;
    double mean_loss = 0.0;
};

/// Mean-over-batch gradients of the softmax cross entropy with respect to
/// every trainable tensor. `indices` selects rows of `data`.
inline QnnGrads backward(const QnnModel &m, const Dataset &data, std::span<const int> indices,
                         GradEngine engine = GradEngine::Adjoint) {
    if (indices.empty()) throw std::invalid_argument("backward: empty batch");
    const int n = m.num_qubits();
    QnnGrads g;
    g.w_in.assign(m.w_in.size(), 0.0);
    g.b_in.assign(m.b_in.size(), 0.0);
    g.theta.assign(m.theta.size(), 0.0);
    g.w_out.assign(m.w_out.size(), 0.0);
    g.b_out.assign(m.b_out.size(), 0.0);

    for (int idx : indices) {
        const Sample &sample = data.rows[static_cast<std::size_t>(idx)];
        const auto a = m.activations(sample.x);
        const auto e = m.embedding_values(a);

        std::vector<double> readouts;
        std::vector<double> d_theta, d_embed;
        std::array<double, kNumClasses> logits{};
        std::array<double, kNumClasses> d_logits{};

        if (engine == GradEngine::Adjoint) {
            // Two-phase: forward once for the loss cotangent, then a single
            // reverse sweep for all slot gradients.
            readouts = run_circuit(m.circuit, m.theta, e);
            logits = m.logits_from_readouts(readouts);
            const auto p = softmax(logits);
            for (int c = 0; c < kNumClasses; ++c)
                d_logits[static_cast<std::size_t>(c)] =
                    p[static_cast<std::size_t>(c)] - (c == sample.label ? 1.0 : 0.0);
            std::vector<double> d_readout(static_cast<std::size_t>(n), 0.0);
            for (int c = 0; c < kNumClasses; ++c)
                for (int i = 0; i < n; ++i)
                    d_readout[static_cast<std::size_t>(i)] +=
                        d_logits[static_cast<std::size_t>(c)] *
                        m.w_out[static_cast<std::size_t>(c) * static_cast<std::size_t>(n) + i];
            const VjpResult vjp = adjoint_vjp(m.circuit, m.theta, e, d_readout);
            d_theta = vjp.d_variational;
            d_embed = vjp.d_embedding;
        } else {
            readouts = run_circuit(m.circuit, m.theta, e);
            logits = m.logits_from_readouts(readouts);
            const auto p = softmax(logits);
            for (int c = 0; c < kNumClasses; ++c)
                d_logits[static_cast<std::size_t>(c)] =
                    p[static_cast<std::size_t>(c)] - (c == sample.label ? 1.0 : 0.0);
            std::vector<double> d_readout(static_cast<std::size_t>(n), 0.0);
            for (int c = 0; c < kNumClasses; ++c)
                for (int i = 0; i < n; ++i)
                    d_readout[static_cast<std::size_t>(i)] +=
                        d_logits[static_cast<std::size_t>(c)] *
                        m.w_out[static_cast<std::size_t>(c) * static_cast<std::size_t>(n) + i];
            GradientRequest req{&m.circuit, m.theta, e, WhichSlots::Both};
            const Jacobian jac = param_shift_grad(req);
            const int v_count = m.circuit.variational_slot_count();
            d_theta.assign(m.theta.size(), 0.0);
            d_embed.assign(e.size(), 0.0);
            for (int r = 0; r < jac.rows; ++r) {
                const double cot = d_readout[static_cast<std::size_t>(r)];
                if (cot == 0.0) continue;
                for (int s = 0; s < v_count; ++s) d_theta[static_cast<std::size_t>(s)] += cot * jac.at(r, s);
                for (std::size_t s = 0; s < e.size(); ++s)
                    d_embed[s] += cot * jac.at(r, v_count + static_cast<int>(s));
            }
        }

        g.mean_loss += cross_entropy(logits, sample.label);
        for (std::size_t s = 0; s < m.theta.size(); ++s) g.theta[s] += d_theta[s];

        const auto da = m.chain_embedding_back(a, d_embed);
        for (int i = 0; i < n; ++i) {
            g.b_in[static_cast<std::size_t>(i)] += da[static_cast<std::size_t>(i)];
            double *row = &g.w_in[static_cast<std::size_t>(i) * kFeatureDim];
            for (int f = 0; f < kFeatureDim; ++f)
                row[f] += da[static_cast<std::size_t>(i)] * sample.x[static_cast<std::size_t>(f)];
        }
        for (int c = 0; c < kNumClasses; ++c) {
            g.b_out[static_cast<std::size_t>(c)] += d_logits[static_cast<std::size_t>(c)];
            double *row = &g.w_out[static_cast<std::size_t>(c) * static_cast<std::size_t>(n)];
            for (int i = 0; i < n; ++i)
                row[i] += d_logits[static_cast<std::size_t>(c)] * readouts[static_cast<std::size_t>(i)];
        }
    }

    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto *tensor : {&g.w_in, &g.b_in, &g.theta, &g.w_out, &g.b_out})
        for (auto &v : *tensor) v *= inv;
    g.mean_loss *= inv;
    return g;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization: a single JSON document holding the spec, all
// weights, the preprocessing statistics and the training seed. Doubles are
// written with 17 significant digits and round-trip bit-exactly.

struct Checkpoint {
    AnsatzSpec spec;
    std::vector<double> w_in, b_in, theta, w_out, b_out;
    Scaler scaler;
    std::uint64_t seed = 0;

    static Checkpoint of(const QnnModel &m, const Scaler &scaler, std::uint64_t seed) {
        return Checkpoint{m.spec, m.w_in, m.b_in, m.theta, m.w_out, m.b_out, scaler, seed};
    }

    QnnModel restore() const {
        QnnModel m(spec);
        m.w_in = w_in;
        m.b_in = b_in;
        m.theta = theta;
        m.w_out = w_out;
        m.b_out = b_out;
        return m;
    }
};

inline std::string checkpoint_to_json(const Checkpoint &cp) {
    JsonWriter w;
    w.begin_object();
    w.kv("format", "autoansatz-checkpoint-v1");
    w.key("spec").begin_object();
    w.kv("embedding", embedding_name(cp.spec.embedding));
    w.kv("variational", variational_name(cp.spec.variational));
    w.kv("n", cp.spec.num_qubits);
    w.kv("L", cp.spec.num_layers);
    w.kv("structure_seed", static_cast<unsigned long long>(cp.spec.structure_seed));
    w.end_object();
    w.kv("seed", static_cast<unsigned long long>(cp.seed));
    w.key("scaler").begin_object();
    w.number_array("mean", {cp.scaler.mean.begin(), cp.scaler.mean.end()});
    w.number_array("std", {cp.scaler.stddev.begin(), cp.scaler.stddev.end()});
    w.end_object();
    w.number_array("w_in", cp.w_in);
    w.number_array("b_in", cp.b_in);
    w.number_array("theta", cp.theta);
    w.number_array("w_out", cp.w_out);
    w.number_array("b_out", cp.b_out);
    w.end_object();
    return w.str();
}

inline void save_checkpoint(const Checkpoint &cp, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << checkpoint_to_json(cp) << "\n";
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("autoansatz-checkpoint-v1"))
        throw std::runtime_error("load_checkpoint: unrecognized format in " + path);
    Checkpoint cp;
    cp.spec.embedding = parse_embedding(j.at("spec").at("embedding").get<std::string>());
    cp.spec.variational = parse_variational(j.at("spec").at("variational").get<std::string>());
    cp.spec.num_qubits = j.at("spec").at("n").get<int>();
    cp.spec.num_layers = j.at("spec").at("L").get<int>();
    cp.spec.structure_seed = j.at("spec").at("structure_seed").get<std::uint64_t>();
    cp.seed = j.at("seed").get<std::uint64_t>();
    const auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
    const auto stddev = j.at("scaler").at("std").get<std::vector<double>>();
    if (mean.size() != kFeatureDim || stddev.size() != kFeatureDim)
        throw std::runtime_error("load_checkpoint: scaler width mismatch");
    std::copy(mean.begin(), mean.end(), cp.scaler.mean.begin());
    std::copy(stddev.begin(), stddev.end(), cp.scaler.stddev.begin());
    cp.w_in = j.at("w_in").get<std::vector<double>>();
    cp.b_in = j.at("b_in").get<std::vector<double>>();
    cp.theta = j.at("theta").get<std::vector<double>>();
    cp.w_out = j.at("w_out").get<std::vector<double>>();
    cp.b_out = j.at("b_out").get<std::vector<double>>();
    const QnnModel shape(cp.spec); // validates lengths against the spec
    if (cp.w_in.size() != shape.w_in.size() || cp.b_in.size() != shape.b_in.size() ||
        cp.theta.size() != shape.theta.size() || cp.w_out.size() != shape.w_out.size() ||
        cp.b_out.size() != shape.b_out.size())
        throw std::runtime_error("load_checkpoint: weight shapes do not match the spec");
    return cp;
}

} // namespace autoansatz
