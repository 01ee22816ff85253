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
 * The AutoAnsatz search engine.
 *
 *  - tpe_suggest: tree-structured Parzen estimator over the search space
 *    (categorical embedding/ansatz, integer n and L, log-uniform lr0).
 *    Until 10 non-pruned trials exist it samples the uniform prior; after
 *    that it splits history at the 0.25 objective quantile, models good
 *    and bad densities (truncated-Gaussian KDEs, add-one-smoothed
 *    categorical weights) and returns the best of 24 candidates by the
 *    density ratio.
 *  - hyperband_should_prune: single-bracket successive halving with
 *    eta = 3 at rung epochs 1, 3, 9, 27, 81; at each rung only the best
 *    ceil(k/3) of the k trials that reached it survive. Non-finite losses
 *    always prune.
 *  - TrialStore: append-only JSON-lines persistence; a store file replays
 *    into the exact in-memory record sequence.
 *  - run_search: suggest -> train (with the pruner as epoch observer) ->
 *    record, fully reproducible from the master seed. Trial seeds come
 *    from a splittable counter over (master seed, trial id).
 *
 * Recorded wall_s is a deterministic nominal compute cost (simulated
 * amplitude-operations / 1e9), not OS wall time: seeded searches must
 * replay byte-identically, which a clock would break. Real elapsed time
 * is reported on the progress stream instead.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "autoansatz/ansatz.hpp"
#include "autoansatz/data.hpp"
#include "autoansatz/json_io.hpp"
#include "autoansatz/model.hpp"
#include "autoansatz/rng.hpp"
#include "autoansatz/train.hpp"

namespace autoansatz {

struct SearchSpace {
    int n_min = 5;
    int n_max = 15;
    int layers_min = 1;
    int layers_max = 5;
    double lr_min = 1e-3;
    double lr_max = 1e-1; // lr0 is sampled log-uniformly
};

struct TrialConfig {
    EmbeddingKind embedding = EmbeddingKind::Angle;
    VariationalKind variational = VariationalKind::S2D;
    int num_qubits = 10;
    int num_layers = 1;
    double lr0 = 0.02;

    AnsatzSpec ansatz(std::uint64_t structure_seed) const {
        return AnsatzSpec{embedding, variational, num_qubits, num_layers, structure_seed};
    }
};

struct TrialFinal {
    double val_loss = std::nan("");
    double val_acc = std::nan("");
    double test_acc = std::nan("");
};

struct TrialRecord {
    int id = 0;
    TrialConfig config;
    std::uint64_t seed = 0;
    std::vector<double> epochs; // validation loss after each completed epoch
    RunStatus status = RunStatus::Running;
    TrialFinal final;
    long long param_count = 0;
    double wall_s = 0.0; // deterministic nominal cost, see file comment

    /// Objective used for TPE splits and the analysis exports: the last
    /// finite validation loss (pruned trials contribute what they saw).
    double objective() const { return final.val_loss; }
};

// --- persistence -----------------------------------------------------------

inline std::string trial_to_json(const TrialRecord &t) {
    JsonWriter w;
    w.begin_object();
    w.kv("id", t.id);
    w.key("config").begin_object();
    w.kv("embedding", embedding_name(t.config.embedding));
    w.kv("variational", variational_name(t.config.variational));
    w.kv("n", t.config.num_qubits);
    w.kv("L", t.config.num_layers);
    w.kv("lr0", t.config.lr0);
    w.end_object();
    w.kv("seed", static_cast<unsigned long long>(t.seed));
    w.number_array("epochs", t.epochs);
    w.kv("status", run_status_name(t.status));
    w.key("final").begin_object();
    w.kv("val_loss", t.final.val_loss);
    w.kv("val_acc", t.final.val_acc);
    w.kv("test_acc", t.final.test_acc);
    w.end_object();
    w.kv("param_count", t.param_count);
    w.kv("wall_s", t.wall_s);
    w.end_object();
    return w.str();
}

inline RunStatus parse_run_status(const std::string &name) {
    for (auto s : {RunStatus::Running, RunStatus::Completed, RunStatus::Pruned,
                   RunStatus::Diverged})
        if (name == run_status_name(s)) return s;
    throw std::runtime_error("unknown trial status: " + name);
}

inline TrialRecord trial_from_json(const nlohmann::json &j) {
    TrialRecord t;
    t.id = j.at("id").get<int>();
    const auto &config = j.at("config");
    t.config.embedding = parse_embedding(config.at("embedding").get<std::string>());
    t.config.variational = parse_variational(config.at("variational").get<std::string>());
    t.config.num_qubits = config.at("n").get<int>();
    t.config.num_layers = config.at("L").get<int>();
    t.config.lr0 = config.at("lr0").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto &e : j.at("epochs")) t.epochs.push_back(json_number_or_nan(e));
    t.status = parse_run_status(j.at("status").get<std::string>());
    t.final.val_loss = json_number_or_nan(j.at("final").at("val_loss"));
    t.final.val_acc = json_number_or_nan(j.at("final").at("val_acc"));
    t.final.test_acc = json_number_or_nan(j.at("final").at("test_acc"));
    t.param_count = j.at("param_count").get<long long>();
    t.wall_s = json_number_or_nan(j.at("wall_s"));
    return t;
}

/// Append-only JSON-lines store. Every append is flushed so the file is
/// replayable even if the search dies mid-run.
class TrialStore {
  public:
    explicit TrialStore(std::string path, bool truncate = true) : path_(std::move(path)) {
        out_.open(path_, truncate ? std::ios::trunc : std::ios::app);
        if (!out_) throw std::runtime_error("TrialStore: cannot open " + path_);
    }

    void append(const TrialRecord &t) {
        out_ << trial_to_json(t) << '\n';
        out_.flush();
        if (!out_) throw std::runtime_error("TrialStore: append failed for " + path_);
    }

    const std::string &path() const { return path_; }

    static std::vector<TrialRecord> load(const std::string &path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("TrialStore: cannot open " + path);
        std::vector<TrialRecord> records;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw std::runtime_error("TrialStore: malformed record at line " +
                                         std::to_string(line_no) + " of " + path);
            records.push_back(trial_from_json(j));
        }
        return records;
    }

  private:
    std::string path_;
    std::ofstream out_;
};

// --- TPE sampler -----------------------------------------------------------

constexpr int kTpeStartupTrials = 10;
constexpr double kTpeGamma = 0.25;
constexpr int kTpeCandidates = 24;
constexpr double kTpeBandwidthFloor = 0.1;

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Mixture of truncated Gaussians on [lo, hi], one kernel per center,
/// bandwidth = domain range * max(floor, 1/#centers): wide while a set is
/// small, floored at 10% of the domain so exploration never dies.
struct TruncatedKde {
    std::vector<double> centers;
    double lo = 0.0, hi = 1.0, bandwidth = 1.0;

    static TruncatedKde fit(std::vector<double> centers, double lo, double hi) {
        TruncatedKde kde;
        kde.centers = std::move(centers);
        kde.lo = lo;
        kde.hi = hi;
        const double share =
            std::max(kTpeBandwidthFloor, 1.0 / static_cast<double>(kde.centers.size()));
        kde.bandwidth = (hi - lo) * share;
        return kde;
    }

    double pdf(double x) const {
        double total = 0.0;
        for (double c : centers) {
            const double z = normal_cdf((hi - c) / bandwidth) - normal_cdf((lo - c) / bandwidth);
            if (z <= 0.0) continue;
            total += normal_pdf((x - c) / bandwidth) / (bandwidth * z);
        }
        return total / static_cast<double>(centers.size());
    }

    double sample(Rng &rng) const {
        const auto pick = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(centers.size()) - 1));
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double x = rng.normal(centers[pick], bandwidth);
            if (x >= lo && x <= hi) return x;
        }
        return std::clamp(centers[pick], lo, hi);
    }
};

/// Add-one-smoothed frequency weights over `cardinality` categories.
inline std::vector<double> smoothed_weights(const std::vector<int> &picks, int cardinality) {
    std::vector<double> w(static_cast<std::size_t>(cardinality), 1.0);
    for (int p : picks) w[static_cast<std::size_t>(p)] += 1.0;
    const double total = static_cast<double>(picks.size() + cardinality);
    for (auto &v : w) v /= total;
    return w;
}

inline int sample_categorical(const std::vector<double> &weights, Rng &rng) {
    double u = rng.uniform();
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

} // namespace detail

inline TrialConfig uniform_sample(const SearchSpace &space, Rng &rng) {
    TrialConfig c;
    c.embedding = static_cast<EmbeddingKind>(rng.uniform_int(0, kNumEmbeddingKinds - 1));
    c.variational = static_cast<VariationalKind>(rng.uniform_int(0, kNumVariationalKinds - 1));
    c.num_qubits = rng.uniform_int(space.n_min, space.n_max);
    c.num_layers = rng.uniform_int(space.layers_min, space.layers_max);
    c.lr0 = std::pow(10.0, rng.uniform(std::log10(space.lr_min), std::log10(space.lr_max)));
    return c;
}

inline TrialConfig tpe_suggest(const std::vector<TrialRecord> &history, const SearchSpace &space,
                               Rng &rng) {
    int non_pruned = 0;
    for (const auto &t : history)
        if (t.status == RunStatus::Completed || t.status == RunStatus::Diverged) ++non_pruned;
    if (non_pruned < kTpeStartupTrials) return uniform_sample(space, rng);

    std::vector<const TrialRecord *> scored;
    for (const auto &t : history)
        if (std::isfinite(t.objective())) scored.push_back(&t);
    if (scored.size() < 2) return uniform_sample(space, rng);
    std::sort(scored.begin(), scored.end(), [](const TrialRecord *a, const TrialRecord *b) {
        if (a->objective() != b->objective()) return a->objective() < b->objective();
        return a->id < b->id;
    });
    const auto n_good = static_cast<std::size_t>(
        std::ceil(kTpeGamma * static_cast<double>(scored.size())));
    if (n_good == scored.size()) return uniform_sample(space, rng);

    struct SplitView {
        std::vector<int> embedding, variational;
        std::vector<double> qubits, layers, log_lr;
    };
    SplitView good, bad;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        SplitView &side = i < n_good ? good : bad;
        side.embedding.push_back(static_cast<int>(scored[i]->config.embedding));
        side.variational.push_back(static_cast<int>(scored[i]->config.variational));
        side.qubits.push_back(static_cast<double>(scored[i]->config.num_qubits));
        side.layers.push_back(static_cast<double>(scored[i]->config.num_layers));
        side.log_lr.push_back(std::log10(scored[i]->config.lr0));
    }

    const auto emb_good = detail::smoothed_weights(good.embedding, kNumEmbeddingKinds);
    const auto emb_bad = detail::smoothed_weights(bad.embedding, kNumEmbeddingKinds);
    const auto var_good = detail::smoothed_weights(good.variational, kNumVariationalKinds);
    const auto var_bad = detail::smoothed_weights(bad.variational, kNumVariationalKinds);
    const auto n_kde_good = detail::TruncatedKde::fit(good.qubits, space.n_min, space.n_max);
    const auto n_kde_bad = detail::TruncatedKde::fit(bad.qubits, space.n_min, space.n_max);
    const auto l_kde_good =
        detail::TruncatedKde::fit(good.layers, space.layers_min, space.layers_max);
    const auto l_kde_bad = detail::TruncatedKde::fit(bad.layers, space.layers_min, space.layers_max);
    const auto lr_kde_good =
        detail::TruncatedKde::fit(good.log_lr, std::log10(space.lr_min), std::log10(space.lr_max));
    const auto lr_kde_bad =
        detail::TruncatedKde::fit(bad.log_lr, std::log10(space.lr_min), std::log10(space.lr_max));

    TrialConfig best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int candidate = 0; candidate < kTpeCandidates; ++candidate) {
        TrialConfig c;
        c.embedding = static_cast<EmbeddingKind>(detail::sample_categorical(emb_good, rng));
        c.variational = static_cast<VariationalKind>(detail::sample_categorical(var_good, rng));
        c.num_qubits = std::clamp(static_cast<int>(std::lround(n_kde_good.sample(rng))),
                                  space.n_min, space.n_max);
        c.num_layers = std::clamp(static_cast<int>(std::lround(l_kde_good.sample(rng))),
                                  space.layers_min, space.layers_max);
        const double log_lr = lr_kde_good.sample(rng);
        c.lr0 = std::pow(10.0, log_lr);

        // log of the l/g density ratio across all five parameters
        double score = 0.0;
        auto ratio = [](double num, double den) {
            constexpr double tiny = 1e-300;
            return std::log(std::max(num, tiny)) - std::log(std::max(den, tiny));
        };
        score += ratio(emb_good[static_cast<std::size_t>(c.embedding)],
                       emb_bad[static_cast<std::size_t>(c.embedding)]);
        score += ratio(var_good[static_cast<std::size_t>(c.variational)],
                       var_bad[static_cast<std::size_t>(c.variational)]);
        score += ratio(n_kde_good.pdf(c.num_qubits), n_kde_bad.pdf(c.num_qubits));
        score += ratio(l_kde_good.pdf(c.num_layers), l_kde_bad.pdf(c.num_layers));
        score += ratio(lr_kde_good.pdf(log_lr), lr_kde_bad.pdf(log_lr));
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

// --- hyperband pruner -------------------------------------------------------

constexpr int kHyperbandEta = 3;
constexpr int kHyperbandMinResource = 1;

/// Rung epochs 1, 3, 9, ... strictly below max_epochs (a trial finishing
/// its last epoch is completing, not prunable).
inline std::vector<int> hyperband_rungs(int max_epochs, int eta = kHyperbandEta,
                                        int min_resource = kHyperbandMinResource) {
    std::vector<int> rungs;
    for (long long r = min_resource; r < max_epochs; r *= eta) rungs.push_back(static_cast<int>(r));
    return rungs;
}

/// Decides at rung `rung_epoch` whether `trial` should stop. Peers are all
/// known records; only those that reached the rung take part. The trial
/// survives iff it ranks within the best ceil(k/eta) of the k participants
/// (itself included). Non-finite losses prune unconditionally.
inline bool hyperband_should_prune(const TrialRecord &trial,
                                   const std::vector<TrialRecord> &peers, int rung_epoch,
                                   int eta = kHyperbandEta) {
    if (trial.epochs.empty())
        throw std::invalid_argument("hyperband_should_prune: trial has no epochs");
    if (rung_epoch < 1 || static_cast<std::size_t>(rung_epoch) > trial.epochs.size())
        throw std::invalid_argument("hyperband_should_prune: trial has not reached the rung");
    const double mine = trial.epochs[static_cast<std::size_t>(rung_epoch - 1)];
    if (!std::isfinite(mine)) return true;

    int participants = 1; // the trial itself
    int strictly_better = 0;
    for (const auto &peer : peers) {
        if (peer.id == trial.id) continue;
        if (peer.epochs.size() < static_cast<std::size_t>(rung_epoch)) continue;
        const double theirs = peer.epochs[static_cast<std::size_t>(rung_epoch - 1)];
        ++participants;
        if (!std::isfinite(theirs)) continue; // diverged peers rank last
        if (theirs < mine || (theirs == mine && peer.id < trial.id)) ++strictly_better;
    }
    const int keep = (participants + eta - 1) / eta; // ceil(k / eta)
    return strictly_better >= keep;
}

// --- search driver ----------------------------------------------------------

struct SearchConfig {
    SearchSpace space;
    int n_trials = 60;
    std::uint64_t master_seed = 0;
    TrainConfig base_train;     // lr0 and seed are overridden per trial
    double val_fraction = 0.2;  // carved out of the training sessions
    int workers = 1;
    std::function<void(const TrialRecord &)> on_trial; // progress hook, may be empty
};

struct SearchResult {
    TrialRecord best;
    double pruned_fraction = 0.0;
    int completed = 0;
    int diverged = 0;
};

namespace detail {

/// Deterministic nominal compute cost in "seconds" at 1e9 amp-ops/s.
inline double nominal_cost_s(const Circuit &circuit, std::size_t train_rows,
                             std::size_t val_rows, std::size_t test_rows, int epochs_run,
                             bool completed) {
    const double per_state = static_cast<double>(circuit.gates().size()) *
                             static_cast<double>(std::size_t{1} << circuit.num_qubits());
    const double per_epoch =
        per_state * (4.0 * static_cast<double>(train_rows) + static_cast<double>(val_rows));
    const double test_cost = completed ? per_state * static_cast<double>(test_rows) : 0.0;
    return (per_epoch * epochs_run + test_cost) / 1e9;
}

} // namespace detail

/// Runs the full search loop against a dataset containing all sessions.
/// One session split, one validation carve-out and one scaler per run, all
/// derived from the master seed; trial seeds come from (master, id).
inline SearchResult run_search(const Dataset &full_dataset, const SearchConfig &config,
                               TrialStore &store) {
    if (config.n_trials < 1) throw std::invalid_argument("run_search: need at least one trial");
    if (config.workers < 1) throw std::invalid_argument("run_search: workers must be >= 1");

    const SessionSplit sessions = split_by_session(full_dataset);
    auto [train_set, val_set] =
        split_holdout(sessions.train, config.val_fraction, derive_seed(config.master_seed, 0x7a1));
    Dataset test_set = sessions.test;
    const Scaler scaler = Scaler::fit(train_set);
    scaler.apply(train_set);
    scaler.apply(val_set);
    scaler.apply(test_set);

    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(config.n_trials));
    Rng suggest_rng(derive_seed(config.master_seed, 0x566));
    int next_id = 1;
    // with parallel workers, completions are buffered so the store file
    // stays ordered by trial id
    std::map<int, TrialRecord> out_of_order;
    int next_store_id = 1;
    std::mutex coordinator;

    auto run_one_trial = [&]() -> bool {
        TrialRecord record;
        std::vector<TrialRecord> snapshot;
        {
            std::lock_guard<std::mutex> lock(coordinator);
            if (next_id > config.n_trials) return false;
            record.id = next_id++;
            record.config = tpe_suggest(records, config.space, suggest_rng);
        }
        record.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(record.id));

        const AnsatzSpec spec = record.config.ansatz(record.seed);
        TrainableQnn trainable{QnnModel::init(spec, record.seed)};
        record.param_count = trainable.model.trainable_count();

        TrainConfig train_config = config.base_train;
        train_config.lr0 = record.config.lr0;
        train_config.seed = record.seed;

        const std::vector<int> rungs = hyperband_rungs(train_config.max_epochs);
        EpochObserver observer = [&](const EpochMetrics &m,
                                     const std::vector<EpochMetrics> &) -> ObserverDecision {
            record.epochs.push_back(m.val_loss);
            if (std::find(rungs.begin(), rungs.end(), m.epoch) == rungs.end())
                return ObserverDecision::Continue;
            {
                std::lock_guard<std::mutex> lock(coordinator);
                snapshot = records;
            }
            return hyperband_should_prune(record, snapshot, m.epoch) ? ObserverDecision::Prune
                                                                     : ObserverDecision::Continue;
        };

        const TrainResult result = train(trainable, train_set, val_set, train_config, observer);
        // the observer only sees epochs that asked for a decision; sync the
        // full per-epoch trace from the history
        record.epochs.clear();
        for (const auto &m : result.history) record.epochs.push_back(m.val_loss);
        record.status = result.status;
        for (auto it = result.history.rbegin(); it != result.history.rend(); ++it) {
            if (std::isfinite(it->val_loss)) {
                record.final.val_loss = it->val_loss;
                record.final.val_acc = it->val_acc;
                break;
            }
        }
        if (record.status == RunStatus::Completed)
            record.final.test_acc = evaluate(trainable, test_set).second;
        record.wall_s = detail::nominal_cost_s(
            trainable.model.circuit, train_set.rows.size(), val_set.rows.size(),
            test_set.rows.size(), static_cast<int>(result.history.size()),
            record.status == RunStatus::Completed);

        {
            std::lock_guard<std::mutex> lock(coordinator);
            out_of_order.emplace(record.id, record);
            while (!out_of_order.empty() && out_of_order.begin()->first == next_store_id) {
                store.append(out_of_order.begin()->second);
                out_of_order.erase(out_of_order.begin());
                ++next_store_id;
            }
            records.push_back(record);
            if (config.on_trial) config.on_trial(record);
        }
        return true;
    };

    if (config.workers == 1) {
        while (run_one_trial()) {
        }
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        pool.reserve(static_cast<std::size_t>(config.workers));
        for (int w = 0; w < config.workers; ++w)
            pool.emplace_back([&] {
                try {
                    while (run_one_trial()) {
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto &t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    SearchResult result;
    const TrialRecord *best = nullptr;
    int pruned = 0;
    for (const auto &t : records) {
        if (t.status == RunStatus::Pruned) ++pruned;
        if (t.status == RunStatus::Diverged) ++result.diverged;
        if (t.status != RunStatus::Completed) continue;
        ++result.completed;
        if (best == nullptr || t.objective() < best->objective() ||
            (t.objective() == best->objective() && t.id < best->id))
            best = &t;
    }
    result.pruned_fraction = static_cast<double>(pruned) / static_cast<double>(records.size());
    if (best == nullptr)
        throw std::runtime_error("run_search: no trial completed; cannot pick a best trial");
    result.best = *best;
    return result;
}

} // namespace autoansatz
