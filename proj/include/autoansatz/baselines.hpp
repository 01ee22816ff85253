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
 * Classical reference models: a residual Mish MLP, k-nearest-neighbor and
 * Gaussian naive Bayes.
 *
 * The MLP is a 36 -> 100 projection, three residual 100 -> 100 blocks
 * (x + mish(Wx + b)) and a 100 -> 8 head: 34808 trainable parameters.
 * It plugs into the same train() loop as the quantum model.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "autoansatz/data.hpp"
#include "autoansatz/model.hpp"
#include "autoansatz/rng.hpp"

namespace autoansatz {

constexpr int kMlpHidden = 100;
constexpr int kMlpBlocks = 3;

/// 36*100+100 + 3*(100*100+100) + 100*8+8
inline long long mlp_param_count() {
    return static_cast<long long>(kFeatureDim) * kMlpHidden + kMlpHidden +
           kMlpBlocks * (kMlpHidden * kMlpHidden + kMlpHidden) +
           kMlpHidden * kNumClasses + kNumClasses;
}

inline double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }

inline double mish(double x) { return x * std::tanh(softplus(x)); }

inline double mish_derivative(double x) {
    const double sp = softplus(x);
    const double t = std::tanh(sp);
    const double sigmoid = 1.0 / (1.0 + std::exp(-x));
    return t + x * (1.0 - t * t) * sigmoid;
}

class MlpModel {
  public:
    static MlpModel init(std::uint64_t seed) {
        MlpModel m;
        Rng rng(derive_seed(seed, 0x317));
        auto glorot = [&](std::vector<double> &w, int fan_in, int fan_out) {
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (auto &v : w) v = rng.uniform(-bound, bound);
        };
        glorot(m.w_in_, kFeatureDim, kMlpHidden);
        for (auto &w : m.w_block_) glorot(w, kMlpHidden, kMlpHidden);
        glorot(m.w_out_, kMlpHidden, kNumClasses);
        return m;
    }

    MlpModel() {
        w_in_.assign(static_cast<std::size_t>(kMlpHidden) * kFeatureDim, 0.0);
        b_in_.assign(kMlpHidden, 0.0);
        for (int b = 0; b < kMlpBlocks; ++b) {
            w_block_[static_cast<std::size_t>(b)].assign(
                static_cast<std::size_t>(kMlpHidden) * kMlpHidden, 0.0);
            b_block_[static_cast<std::size_t>(b)].assign(kMlpHidden, 0.0);
        }
        w_out_.assign(static_cast<std::size_t>(kNumClasses) * kMlpHidden, 0.0);
        b_out_.assign(kNumClasses, 0.0);
    }

    long long trainable_count() const {
        std::size_t total = w_in_.size() + b_in_.size() + w_out_.size() + b_out_.size();
        for (int b = 0; b < kMlpBlocks; ++b)
            total += w_block_[static_cast<std::size_t>(b)].size() +
                     b_block_[static_cast<std::size_t>(b)].size();
        return static_cast<long long>(total);
    }

    std::vector<std::span<double>> param_blocks() {
        std::vector<std::span<double>> blocks{w_in_, b_in_};
        for (int b = 0; b < kMlpBlocks; ++b) {
            blocks.emplace_back(w_block_[static_cast<std::size_t>(b)]);
            blocks.emplace_back(b_block_[static_cast<std::size_t>(b)]);
        }
        blocks.emplace_back(w_out_);
        blocks.emplace_back(b_out_);
        return blocks;
    }

    std::array<double, kNumClasses> logits(const std::array<double, kFeatureDim> &x) const {
        Activations scratch;
        return forward(x, scratch);
    }

    std::pair<std::vector<std::vector<double>>, double>
    backward_batch(const Dataset &data, std::span<const int> indices) const {
        if (indices.empty()) throw std::invalid_argument("MlpModel: empty batch");
        std::vector<std::vector<double>> grads;
        grads.emplace_back(w_in_.size(), 0.0);
        grads.emplace_back(b_in_.size(), 0.0);
        for (int b = 0; b < kMlpBlocks; ++b) {
            grads.emplace_back(w_block_[static_cast<std::size_t>(b)].size(), 0.0);
            grads.emplace_back(b_block_[static_cast<std::size_t>(b)].size(), 0.0);
        }
        grads.emplace_back(w_out_.size(), 0.0);
        grads.emplace_back(b_out_.size(), 0.0);

        double loss = 0.0;
        Activations act;
        for (int idx : indices) {
            const Sample &sample = data.rows[static_cast<std::size_t>(idx)];
            const auto logits = forward(sample.x, act);
            loss += cross_entropy(logits, sample.label);
            accumulate_gradients(sample, logits, act, grads);
        }
        const double inv = 1.0 / static_cast<double>(indices.size());
        for (auto &g : grads)
            for (auto &v : g) v *= inv;
        return {std::move(grads), loss * inv};
    }

  private:
    struct Activations {
        std::array<double, kMlpHidden> pre_in{};  // W_in x + b_in
        std::array<double, kMlpHidden> h0{};      // mish(pre_in)
        std::array<std::array<double, kMlpHidden>, kMlpBlocks> pre_block{};
        std::array<std::array<double, kMlpHidden>, kMlpBlocks> h{}; // after each residual block
    };

    std::array<double, kNumClasses> forward(const std::array<double, kFeatureDim> &x,
                                            Activations &act) const {
        for (int i = 0; i < kMlpHidden; ++i) {
            double acc = b_in_[static_cast<std::size_t>(i)];
            const double *row = &w_in_[static_cast<std::size_t>(i) * kFeatureDim];
            for (int f = 0; f < kFeatureDim; ++f) acc += row[f] * x[static_cast<std::size_t>(f)];
            act.pre_in[static_cast<std::size_t>(i)] = acc;
            act.h0[static_cast<std::size_t>(i)] = mish(acc);
        }
        const std::array<double, kMlpHidden> *prev = &act.h0;
        for (int b = 0; b < kMlpBlocks; ++b) {
            for (int i = 0; i < kMlpHidden; ++i) {
                double acc = b_block_[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
                const double *row = &w_block_[static_cast<std::size_t>(b)]
                                             [static_cast<std::size_t>(i) * kMlpHidden];
                for (int j = 0; j < kMlpHidden; ++j) acc += row[j] * (*prev)[static_cast<std::size_t>(j)];
                act.pre_block[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] = acc;
                act.h[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] =
                    (*prev)[static_cast<std::size_t>(i)] + mish(acc);
            }
            prev = &act.h[static_cast<std::size_t>(b)];
        }
        std::array<double, kNumClasses> logits{};
        for (int c = 0; c < kNumClasses; ++c) {
            double acc = b_out_[static_cast<std::size_t>(c)];
            const double *row = &w_out_[static_cast<std::size_t>(c) * kMlpHidden];
            for (int j = 0; j < kMlpHidden; ++j) acc += row[j] * (*prev)[static_cast<std::size_t>(j)];
            logits[static_cast<std::size_t>(c)] = acc;
        }
        return logits;
    }

    void accumulate_gradients(const Sample &sample, const std::array<double, kNumClasses> &logits,
                              const Activations &act,
                              std::vector<std::vector<double>> &grads) const {
        const auto p = softmax(logits);
        std::array<double, kNumClasses> d_logits{};
        for (int c = 0; c < kNumClasses; ++c)
            d_logits[static_cast<std::size_t>(c)] =
                p[static_cast<std::size_t>(c)] - (c == sample.label ? 1.0 : 0.0);

        auto &g_w_out = grads[2 + 2 * kMlpBlocks];
        auto &g_b_out = grads[3 + 2 * kMlpBlocks];
        const auto &last = act.h[kMlpBlocks - 1];
        std::array<double, kMlpHidden> d_h{};
        for (int c = 0; c < kNumClasses; ++c) {
            g_b_out[static_cast<std::size_t>(c)] += d_logits[static_cast<std::size_t>(c)];
            double *row = &g_w_out[static_cast<std::size_t>(c) * kMlpHidden];
            const double *w_row = &w_out_[static_cast<std::size_t>(c) * kMlpHidden];
            for (int j = 0; j < kMlpHidden; ++j) {
                row[j] += d_logits[static_cast<std::size_t>(c)] * last[static_cast<std::size_t>(j)];
                d_h[static_cast<std::size_t>(j)] += d_logits[static_cast<std::size_t>(c)] * w_row[j];
            }
        }

        for (int b = kMlpBlocks - 1; b >= 0; --b) {
            const auto &input = b == 0 ? act.h0 : act.h[static_cast<std::size_t>(b - 1)];
            auto &g_w = grads[2 + 2 * static_cast<std::size_t>(b)];
            auto &g_b = grads[3 + 2 * static_cast<std::size_t>(b)];
            std::array<double, kMlpHidden> d_input = d_h; // identity skip
            for (int i = 0; i < kMlpHidden; ++i) {
                const double d_pre =
                    d_h[static_cast<std::size_t>(i)] *
                    mish_derivative(act.pre_block[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)]);
                g_b[static_cast<std::size_t>(i)] += d_pre;
                double *row = &g_w[static_cast<std::size_t>(i) * kMlpHidden];
                const double *w_row =
                    &w_block_[static_cast<std::size_t>(b)][static_cast<std::size_t>(i) * kMlpHidden];
                for (int j = 0; j < kMlpHidden; ++j) {
                    row[j] += d_pre * input[static_cast<std::size_t>(j)];
                    d_input[static_cast<std::size_t>(j)] += d_pre * w_row[j];
                }
            }
            d_h = d_input;
        }

        auto &g_w_in = grads[0];
        auto &g_b_in = grads[1];
        for (int i = 0; i < kMlpHidden; ++i) {
            const double d_pre =
                d_h[static_cast<std::size_t>(i)] * mish_derivative(act.pre_in[static_cast<std::size_t>(i)]);
            g_b_in[static_cast<std::size_t>(i)] += d_pre;
            double *row = &g_w_in[static_cast<std::size_t>(i) * kFeatureDim];
            for (int f = 0; f < kFeatureDim; ++f)
                row[f] += d_pre * sample.x[static_cast<std::size_t>(f)];
        }
    }

    std::vector<double> w_in_, b_in_;
    std::array<std::vector<double>, kMlpBlocks> w_block_;
    std::array<std::vector<double>, kMlpBlocks> b_block_;
    std::vector<double> w_out_, b_out_;
};

/// Majority label among the k Euclidean-nearest rows. Distance ties break
/// toward the lower row index, vote ties toward the lower label.
inline int knn_predict(const Dataset &train, const std::array<double, kFeatureDim> &x, int k) {
    if (train.rows.empty()) throw std::invalid_argument("knn_predict: empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.rows.size())
        throw std::invalid_argument("knn_predict: k must be in [1, |train|]");
    std::vector<std::pair<double, std::size_t>> distances;
    distances.reserve(train.rows.size());
    for (std::size_t i = 0; i < train.rows.size(); ++i) {
        double d2 = 0.0;
        for (int f = 0; f < kFeatureDim; ++f) {
            const double d = train.rows[i].x[static_cast<std::size_t>(f)] - x[static_cast<std::size_t>(f)];
            d2 += d * d;
        }
        distances.emplace_back(d2, i);
    }
    std::partial_sort(distances.begin(), distances.begin() + k, distances.end());
    std::array<int, kNumClasses> votes{};
    for (int i = 0; i < k; ++i) votes[static_cast<std::size_t>(train.rows[distances[static_cast<std::size_t>(i)].second].label)]++;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return best;
}

/// Per-class feature Gaussians with floored variances plus class priors.
struct GnbModel {
    std::vector<int> classes; // classes observed at fit time, ascending
    std::vector<std::array<double, kFeatureDim>> mean;
    std::vector<std::array<double, kFeatureDim>> variance;
    std::vector<double> log_prior;
};

inline GnbModel gnb_fit(const Dataset &train) {
    if (train.rows.empty()) throw std::invalid_argument("gnb_fit: empty training set");
    std::array<int, kNumClasses> counts{};
    for (const auto &row : train.rows) counts[static_cast<std::size_t>(row.label)]++;

    GnbModel m;
    std::array<int, kNumClasses> slot{};
    slot.fill(-1);
    for (int c = 0; c < kNumClasses; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) continue;
        slot[static_cast<std::size_t>(c)] = static_cast<int>(m.classes.size());
        m.classes.push_back(c);
        m.mean.push_back({});
        m.variance.push_back({});
        m.log_prior.push_back(std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                                       static_cast<double>(train.rows.size())));
    }
    for (const auto &row : train.rows) {
        auto &mu = m.mean[static_cast<std::size_t>(slot[static_cast<std::size_t>(row.label)])];
        for (int f = 0; f < kFeatureDim; ++f) mu[static_cast<std::size_t>(f)] += row.x[static_cast<std::size_t>(f)];
    }
    for (std::size_t k = 0; k < m.classes.size(); ++k)
        for (auto &v : m.mean[k]) v /= counts[static_cast<std::size_t>(m.classes[k])];
    for (const auto &row : train.rows) {
        const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(row.label)]);
        for (int f = 0; f < kFeatureDim; ++f) {
            const double d = row.x[static_cast<std::size_t>(f)] - m.mean[s][static_cast<std::size_t>(f)];
            m.variance[s][static_cast<std::size_t>(f)] += d * d;
        }
    }
    for (std::size_t k = 0; k < m.classes.size(); ++k)
        for (auto &v : m.variance[k])
            v = std::max(v / counts[static_cast<std::size_t>(m.classes[k])], 1e-9);
    return m;
}

inline int gnb_predict(const GnbModel &m, const std::array<double, kFeatureDim> &x) {
    if (m.classes.empty()) throw std::invalid_argument("gnb_predict: model has no classes");
    int best_class = m.classes[0];
    double best_score = -std::numeric_limits<double>::infinity();
    constexpr double log_two_pi = 1.8378770664093453;
    for (std::size_t k = 0; k < m.classes.size(); ++k) {
        double score = m.log_prior[k];
        for (int f = 0; f < kFeatureDim; ++f) {
            const double var = m.variance[k][static_cast<std::size_t>(f)];
            const double d = x[static_cast<std::size_t>(f)] - m.mean[k][static_cast<std::size_t>(f)];
            score += -0.5 * (log_two_pi + std::log(var) + d * d / var);
        }
        if (score > best_score) { // strict: ties keep the lower class index
            best_score = score;
            best_class = m.classes[k];
        }
    }
    return best_class;
}

} // namespace autoansatz
