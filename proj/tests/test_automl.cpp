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

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "autoansatz/automl.hpp"

using namespace autoansatz;

namespace {

TrialRecord completed_trial(int id, const TrialConfig &config, double loss) {
    TrialRecord t;
    t.id = id;
    t.config = config;
    t.seed = static_cast<std::uint64_t>(id);
    t.epochs = {loss};
    t.status = RunStatus::Completed;
    t.final.val_loss = loss;
    t.final.val_acc = 0.5;
    t.final.test_acc = 0.5;
    t.param_count = 100;
    t.wall_s = 1.0;
    return t;
}

bool in_space(const TrialConfig &c, const SearchSpace &space) {
    return c.num_qubits >= space.n_min && c.num_qubits <= space.n_max &&
           c.num_layers >= space.layers_min && c.num_layers <= space.layers_max &&
           c.lr0 >= space.lr_min && c.lr0 <= space.lr_max;
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("suggestions always lie inside the search space") {
    SearchSpace space;
    Rng rng(5);
    std::vector<TrialRecord> history;
    for (int i = 0; i < 300; ++i) {
        const TrialConfig c = tpe_suggest(history, space, rng);
        CHECK(in_space(c, space));
        if (i % 2 == 0) history.push_back(completed_trial(i + 1, c, rng.uniform(0.1, 2.0)));
    }
}

TEST_CASE("startup phase samples the uniform prior") {
    SearchSpace space;
    Rng rng(11);
    std::vector<TrialRecord> history; // 5 completed trials: still in startup
    TrialConfig pinned;
    pinned.lr0 = 0.05;
    for (int i = 0; i < 5; ++i) history.push_back(completed_trial(i + 1, pinned, 0.1));
    std::array<int, kNumVariationalKinds> seen{};
    for (int i = 0; i < 400; ++i) {
        const TrialConfig c = tpe_suggest(history, space, rng);
        seen[static_cast<std::size_t>(c.variational)]++;
    }
    for (int count : seen) CHECK(count > 20); // every category keeps appearing
}

TEST_CASE("tpe concentrates lr0 near the rigged optimum") {
    SearchSpace space;
    Rng rng(2024);
    std::vector<TrialRecord> history;
    for (int i = 0; i < 40; ++i) {
        TrialConfig c = uniform_sample(space, rng);
        const double u = std::log10(c.lr0);
        history.push_back(completed_trial(i + 1, c, (u + 1.7) * (u + 1.7)));
    }
    std::vector<double> suggested;
    for (int i = 0; i < 200; ++i) suggested.push_back(tpe_suggest(history, space, rng).lr0);
    std::sort(suggested.begin(), suggested.end());
    const double median = suggested[suggested.size() / 2];
    CHECK(median >= 0.005);
    CHECK(median <= 0.08);
}

TEST_CASE("a dominant category outweighs its prior in the good-set sampler") {
    // 5 mps trials at loss 0.1 and 15 others at 1.0: the good quantile is
    // all mps, so its smoothed weight is (5+1)/(5+7) = 0.5 > 1/7.
    const auto weights = detail::smoothed_weights({3, 3, 3, 3, 3}, kNumVariationalKinds);
    CHECK(weights[3] == doctest::Approx(0.5));
    CHECK(weights[3] > 1.0 / 7.0);

    SearchSpace space;
    Rng rng(77);
    std::vector<TrialRecord> history;
    for (int i = 0; i < 20; ++i) {
        TrialConfig c = uniform_sample(space, rng);
        c.variational = i < 5 ? VariationalKind::MPS
                              : static_cast<VariationalKind>(i % kNumVariationalKinds);
        if (i >= 5 && c.variational == VariationalKind::MPS) c.variational = VariationalKind::S2D;
        history.push_back(completed_trial(i + 1, c, i < 5 ? 0.1 : 1.0));
    }
    int mps_count = 0;
    for (int i = 0; i < 200; ++i)
        if (tpe_suggest(history, space, rng).variational == VariationalKind::MPS) ++mps_count;
    CHECK(mps_count > 200 / 7); // clearly above the prior rate
}

TEST_CASE("tpe beats uniform sampling on the rigged objective") {
    SearchSpace space;
    auto objective = [](double lr0) {
        const double u = std::log10(lr0) + 1.7;
        return u * u;
    };
    int tpe_wins = 0;
    for (int rep = 0; rep < 5; ++rep) {
        Rng tpe_rng(1000 + rep);
        std::vector<TrialRecord> history;
        double tpe_best = 1e300;
        for (int i = 0; i < 60; ++i) {
            const TrialConfig c = tpe_suggest(history, space, tpe_rng);
            const double loss = objective(c.lr0);
            tpe_best = std::min(tpe_best, loss);
            history.push_back(completed_trial(i + 1, c, loss));
        }
        Rng uniform_rng(5000 + rep);
        double uniform_best = 1e300;
        for (int i = 0; i < 60; ++i)
            uniform_best = std::min(uniform_best, objective(uniform_sample(space, uniform_rng).lr0));
        if (tpe_best <= uniform_best) ++tpe_wins;
    }
    CHECK(tpe_wins >= 4);
}

TEST_CASE("hyperband rung schedule") {
    CHECK(hyperband_rungs(100) == std::vector<int>{1, 3, 9, 27, 81});
    CHECK(hyperband_rungs(12) == std::vector<int>{1, 3, 9});
    CHECK(hyperband_rungs(9) == std::vector<int>{1, 3});
    CHECK(hyperband_rungs(1).empty());
}

TEST_CASE("nine peers at a rung keep exactly the top three") {
    std::vector<TrialRecord> peers;
    TrialConfig c;
    for (int i = 0; i < 9; ++i) {
        TrialRecord t = completed_trial(i + 1, c, 0.0);
        t.epochs = {1.0, 0.9, 0.1 * (i + 1)}; // loss at rung 3 ranks by id
        peers.push_back(t);
    }
    int pruned = 0;
    for (const auto &t : peers) {
        const bool prune = hyperband_should_prune(t, peers, 3);
        if (prune) ++pruned;
        if (t.id <= 3) CHECK(!prune);
        if (t.id >= 4) CHECK(prune);
    }
    CHECK(pruned == 6);
}

TEST_CASE("rank one survives every rung and divergence always prunes") {
    std::vector<TrialRecord> peers;
    TrialConfig c;
    for (int i = 0; i < 9; ++i) {
        TrialRecord t = completed_trial(i + 1, c, 0.0);
        t.epochs.assign(27, 1.0 + i);
        peers.push_back(t);
    }
    for (int rung : {1, 3, 9, 27}) CHECK(!hyperband_should_prune(peers[0], peers, rung));

    TrialRecord diverged = completed_trial(99, c, 0.0);
    diverged.epochs = {std::nan("")};
    CHECK(hyperband_should_prune(diverged, {}, 1)); // regardless of peers
    CHECK(hyperband_should_prune(diverged, peers, 1));

    TrialRecord fresh = completed_trial(100, c, 0.0);
    fresh.epochs.clear();
    CHECK_THROWS_AS(hyperband_should_prune(fresh, peers, 1), std::invalid_argument);
}

TEST_CASE("trial records survive a store round trip") {
    const auto path = std::filesystem::temp_directory_path() / "autoansatz_store_test.jsonl";
    TrialConfig c;
    c.embedding = EmbeddingKind::IQP;
    c.variational = VariationalKind::TTN;
    c.num_qubits = 7;
    c.num_layers = 3;
    c.lr0 = 0.0123;
    {
        TrialStore store(path.string());
        TrialRecord a = completed_trial(1, c, 0.25);
        TrialRecord b = completed_trial(2, c, 0.5);
        b.status = RunStatus::Pruned;
        b.epochs = {0.9, 0.5};
        b.final.test_acc = std::nan(""); // pruned: no test evaluation
        TrialRecord d = completed_trial(3, c, 0.0);
        d.status = RunStatus::Diverged;
        d.epochs = {std::nan("")};
        d.final.val_loss = std::nan("");
        d.final.val_acc = std::nan("");
        d.final.test_acc = std::nan("");
        store.append(a);
        store.append(b);
        store.append(d);
    }
    const auto records = TrialStore::load(path.string());
    REQUIRE(records.size() == 3);
    CHECK(records[0].config.lr0 == 0.0123);
    CHECK(records[0].config.variational == VariationalKind::TTN);
    CHECK(records[0].final.val_loss == 0.25);
    CHECK(records[1].status == RunStatus::Pruned);
    CHECK(records[1].epochs.size() == 2);
    CHECK(std::isnan(records[1].final.test_acc));
    CHECK(records[2].status == RunStatus::Diverged);
    CHECK(std::isnan(records[2].epochs[0]));

    std::ofstream(path, std::ios::app) << "{not json\n";
    CHECK_THROWS_AS(TrialStore::load(path.string()), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("desk search end to end on a reduced space") {
    SynthConfig dconf;
    dconf.per_class_per_session = 4;
    dconf.seed = 3;
    const Dataset data = generate_synthetic(dconf);

    SearchConfig config;
    config.space.n_max = 6;
    config.space.layers_max = 2;
    config.n_trials = 8;
    config.master_seed = 21;
    config.base_train.max_epochs = 4;
    config.base_train.batch_size = 32;

    const auto path_a = std::filesystem::temp_directory_path() / "autoansatz_search_a.jsonl";
    const auto path_b = std::filesystem::temp_directory_path() / "autoansatz_search_b.jsonl";
    SearchResult result_a;
    {
        TrialStore store(path_a.string());
        result_a = run_search(data, config, store);
    }
    {
        TrialStore store(path_b.string());
        (void)run_search(data, config, store);
    }
    CHECK(read_file(path_a) == read_file(path_b)); // byte-identical rerun

    const auto records = TrialStore::load(path_a.string());
    REQUIRE(records.size() == 8);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto &t = records[i];
        CHECK(t.id == static_cast<int>(i) + 1);
        CHECK(in_space(t.config, config.space));
        // (36n + n) + count_params + (8n + 8)
        CHECK(t.param_count == 36LL * t.config.num_qubits + t.config.num_qubits +
                                   count_params(t.config.variational, t.config.num_qubits,
                                                t.config.num_layers) +
                                   8LL * t.config.num_qubits + 8);
        if (t.status == RunStatus::Pruned) {
            CHECK(t.epochs.size() < static_cast<std::size_t>(config.base_train.max_epochs));
            const auto rungs = hyperband_rungs(config.base_train.max_epochs);
            CHECK(std::find(rungs.begin(), rungs.end(), static_cast<int>(t.epochs.size())) !=
                  rungs.end());
        }
        if (t.status == RunStatus::Completed) CHECK(std::isfinite(t.final.test_acc));
        CHECK(t.wall_s > 0.0);
    }

    // replay reconstructs the same best trial
    const TrialRecord *best = nullptr;
    for (const auto &t : records) {
        if (t.status != RunStatus::Completed) continue;
        if (best == nullptr || t.objective() < best->objective()) best = &t;
    }
    REQUIRE(best != nullptr);
    CHECK(best->id == result_a.best.id);

    std::filesystem::remove(path_a);
    std::filesystem::remove(path_b);
}

TEST_CASE("parallel workers fill the store under the single-writer lock") {
    SynthConfig dconf;
    dconf.per_class_per_session = 3;
    dconf.seed = 9;
    const Dataset data = generate_synthetic(dconf);

    SearchConfig config;
    config.space.n_max = 6;
    config.space.layers_max = 2;
    config.n_trials = 6;
    config.master_seed = 4;
    config.base_train.max_epochs = 2;
    config.base_train.batch_size = 32;
    config.workers = 2;

    const auto path = std::filesystem::temp_directory_path() / "autoansatz_search_mt.jsonl";
    {
        TrialStore store(path.string());
        const SearchResult result = run_search(data, config, store);
        CHECK(result.completed >= 1);
    }
    const auto records = TrialStore::load(path.string());
    CHECK(records.size() == 6);
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(records[i].id == static_cast<int>(i) + 1); // id-ordered despite racing workers
    std::filesystem::remove(path);
}

TEST_CASE("single-trial search returns that trial as best") {
    SynthConfig dconf;
    dconf.per_class_per_session = 2;
    dconf.seed = 13;
    const Dataset data = generate_synthetic(dconf);
    SearchConfig config;
    config.space.n_max = 5;
    config.n_trials = 1;
    config.master_seed = 8;
    config.base_train.max_epochs = 1;
    config.base_train.batch_size = 32;
    const auto path = std::filesystem::temp_directory_path() / "autoansatz_search_one.jsonl";
    TrialStore store(path.string());
    const SearchResult result = run_search(data, config, store);
    CHECK(result.best.id == 1);
    CHECK(TrialStore::load(path.string()).size() == 1);
    std::filesystem::remove(path);
}
