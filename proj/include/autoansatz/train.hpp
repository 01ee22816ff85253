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
 * Mini-batch AdamW training with a reduce-on-plateau schedule.
 *
 * The loop is generic over any model exposing
 *   param_blocks()                  -> mutable spans over parameter tensors
 *   backward_batch(dataset, index)  -> per-block gradients + mean loss
 *   logits(features)                -> class scores
 * which covers both the hybrid quantum model and the classical MLP.
 *
 * The plateau schedule watches the training loss; the per-epoch observer
 * (the pruner, during search) watches validation loss. A non-finite loss
 * or a validation loss above the divergence bound stops the run with a
 * Diverged status instead of raising, so searches survive bad trials.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "autoansatz/data.hpp"
#include "autoansatz/model.hpp"
#include "autoansatz/rng.hpp"

namespace autoansatz {

struct TrainConfig {
    int batch_size = 100;
    int max_epochs = 100;
    double lr0 = 0.02;
    double weight_decay = 1e-4;
    double plateau_factor = 0.5;
    int plateau_patience = 10;
    double plateau_threshold = 1e-4;
    double divergence_val_loss = 50.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (max_epochs < 0) throw std::invalid_argument("TrainConfig: max_epochs must be >= 0");
        if (!(lr0 > 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be positive");
        if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
            throw std::invalid_argument("TrainConfig: plateau_factor must be in (0, 1)");
        if (plateau_patience < 1)
            throw std::invalid_argument("TrainConfig: plateau_patience must be >= 1");
    }
};

struct EpochMetrics {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0; // rate in effect during this epoch
    bool diverged = false;
};

enum class RunStatus : std::uint8_t { Running, Completed, Pruned, Diverged };

inline const char *run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Running: return "running";
        case RunStatus::Completed: return "completed";
        case RunStatus::Pruned: return "pruned";
        case RunStatus::Diverged: return "diverged";
    }
    return "?";
}

struct TrainResult {
    std::vector<EpochMetrics> history;
    RunStatus status = RunStatus::Completed;
};

enum class ObserverDecision : std::uint8_t { Continue, Prune };

/// Called after every epoch with the fresh metrics and the full history.
using EpochObserver =
    std::function<ObserverDecision(const EpochMetrics &, const std::vector<EpochMetrics> &)>;

/// Decoupled-weight-decay Adam. Moments live here; one instance per run.
class AdamW {
  public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    void step(std::vector<std::span<double>> params,
              const std::vector<std::vector<double>> &grads, double lr, double weight_decay) {
        if (params.size() != grads.size())
            throw std::invalid_argument("AdamW: block count mismatch");
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t b = 0; b < params.size(); ++b) {
                m_[b].assign(params[b].size(), 0.0);
                v_[b].assign(params[b].size(), 0.0);
            }
        }
        ++t_;
        const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t b = 0; b < params.size(); ++b) {
            if (params[b].size() != grads[b].size())
                throw std::invalid_argument("AdamW: shape mismatch in block " + std::to_string(b));
            for (std::size_t i = 0; i < params[b].size(); ++i) {
                const double g = grads[b][i];
                m_[b][i] = kBeta1 * m_[b][i] + (1.0 - kBeta1) * g;
                v_[b][i] = kBeta2 * v_[b][i] + (1.0 - kBeta2) * g * g;
                const double m_hat = m_[b][i] / bias1;
                const double v_hat = v_[b][i] / bias2;
                params[b][i] -= lr * m_hat / (std::sqrt(v_hat) + kEpsilon) +
                                lr * weight_decay * params[b][i];
            }
        }
    }

    long long steps_taken() const { return t_; }

  private:
    std::vector<std::vector<double>> m_, v_;
    long long t_ = 0;
};

/// Halves the rate after `patience` consecutive epochs without the
/// monitored loss improving by at least `threshold`.
class PlateauScheduler {
  public:
    PlateauScheduler(double lr0, double factor, int patience, double threshold)
        : lr_(lr0), factor_(factor), patience_(patience), threshold_(threshold) {}

    void feed(double monitored_loss) {
        if (monitored_loss <= best_ - threshold_) { // improved by at least the threshold
            best_ = monitored_loss;
            stall_ = 0;
            return;
        }
        if (++stall_ >= patience_) {
            lr_ *= factor_;
            stall_ = 0;
        }
    }

    double lr() const { return lr_; }

  private:
    double lr_;
    double factor_;
    int patience_;
    double threshold_;
    int stall_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// Mean loss and argmax accuracy over a dataset. Ties go to the lowest
/// class index.
template <typename Model>
std::pair<double, double> evaluate(const Model &model, const Dataset &ds) {
    if (ds.rows.empty()) throw std::invalid_argument("evaluate: empty dataset");
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto &row : ds.rows) {
        const auto logits = model.logits(row.x);
        loss += cross_entropy(logits, row.label);
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) best = c;
        if (best == row.label) ++correct;
    }
    return {loss / static_cast<double>(ds.rows.size()),
            static_cast<double>(correct) / static_cast<double>(ds.rows.size())};
}

template <typename Model>
TrainResult train(Model &model, const Dataset &train_set, const Dataset &val_set,
                  const TrainConfig &config, const EpochObserver &observer = {}) {
    config.validate();
    if (config.max_epochs > 0 && train_set.rows.empty())
        throw std::invalid_argument("train: empty training set");

    TrainResult result;
    if (config.max_epochs == 0) return result;

    Rng shuffle_rng(derive_seed(config.seed, 0x50f));
    std::vector<int> order(train_set.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    AdamW optimizer;
    PlateauScheduler scheduler(config.lr0, config.plateau_factor, config.plateau_patience,
                               config.plateau_threshold);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double lr = scheduler.lr();
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t count =
                std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
            const std::span<const int> batch(order.data() + start, count);
            auto [grads, batch_loss] = model.backward_batch(train_set, batch);
            loss_sum += batch_loss * static_cast<double>(count);
            if (!std::isfinite(batch_loss)) {
                // record the broken epoch and bail out as diverged
                EpochMetrics metrics{epoch, batch_loss, std::nan(""), 0.0, lr, true};
                result.history.push_back(metrics);
                result.status = RunStatus::Diverged;
                return result;
            }
            optimizer.step(model.param_blocks(), grads, lr, config.weight_decay);
        }
        const double train_loss = loss_sum / static_cast<double>(order.size());

        auto [val_loss, val_acc] = evaluate(model, val_set);
        EpochMetrics metrics{epoch, train_loss, val_loss, val_acc, lr, false};

        const bool diverged = !std::isfinite(train_loss) || !std::isfinite(val_loss) ||
                              val_loss > config.divergence_val_loss;
        if (diverged) {
            metrics.diverged = true;
            result.history.push_back(metrics);
            result.status = RunStatus::Diverged;
            return result;
        }

        result.history.push_back(metrics);
        scheduler.feed(train_loss);

        if (observer && epoch < config.max_epochs) {
            if (observer(metrics, result.history) == ObserverDecision::Prune) {
                result.status = RunStatus::Pruned;
                return result;
            }
        }
    }
    result.status = RunStatus::Completed;
    return result;
}

/// epoch,train_loss,val_loss,val_acc,lr
inline void write_metrics_csv(const std::vector<EpochMetrics> &history, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    out << "epoch,train_loss,val_loss,val_acc,lr\n";
    for (const auto &m : history)
        out << m.epoch << ',' << detail::format_double(m.train_loss) << ','
            << detail::format_double(m.val_loss) << ',' << detail::format_double(m.val_acc) << ','
            << detail::format_double(m.lr) << '\n';
    if (!out) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

// Trainable-model adapter for the hybrid classifier.
struct TrainableQnn {
    QnnModel model;
    GradEngine engine = GradEngine::Adjoint;

    std::vector<std::span<double>> param_blocks() {
        return {model.w_in, model.b_in, model.theta, model.w_out, model.b_out};
    }

    std::pair<std::vector<std::vector<double>>, double>
    backward_batch(const Dataset &data, std::span<const int> indices) const {
        QnnGrads g = backward(model, data, indices, engine);
        std::vector<std::vector<double>> blocks;
        blocks.push_back(std::move(g.w_in));
        blocks.push_back(std::move(g.b_in));
        blocks.push_back(std::move(g.theta));
        blocks.push_back(std::move(g.w_out));
        blocks.push_back(std::move(g.b_out));
        return {std::move(blocks), g.mean_loss};
    }

    std::array<double, kNumClasses> logits(const std::array<double, kFeatureDim> &x) const {
        return model.logits(x);
    }
};

} // namespace autoansatz
