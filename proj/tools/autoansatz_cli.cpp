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
//
// Command-line entry point: dataset generation, single-model training, the
// AutoAnsatz search, report exports and the classical baselines.
//
// Conventions: human-readable progress and effective configs go to stderr;
// machine-readable artifacts go to files or stdout. Exit codes: 0 success,
// 1 runtime/IO failure, 2 argument error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "autoansatz/analysis.hpp"
#include "autoansatz/automl.hpp"
#include "autoansatz/baselines.hpp"
#include "autoansatz/train.hpp"

namespace {

using namespace autoansatz;

struct PreparedData {
    Dataset train, val, test;
    Scaler scaler;
};

// Session split, validation carve-out and standardization, shared by the
// train and baselines commands.
PreparedData prepare(const std::string &path, double val_fraction, std::uint64_t seed) {
    const Dataset full = load_csv(path);
    const SessionSplit sessions = split_by_session(full);
    PreparedData d;
    auto [train, val] = split_holdout(sessions.train, val_fraction, derive_seed(seed, 0x7a1));
    d.train = std::move(train);
    d.val = std::move(val);
    d.test = sessions.test;
    d.scaler = Scaler::fit(d.train);
    d.scaler.apply(d.train);
    d.scaler.apply(d.val);
    d.scaler.apply(d.test);
    return d;
}

int cmd_gen_data(const std::string &out, std::uint64_t seed, int per_class, double sep,
                 double noise, double session_shift) {
    std::cerr << "# gen-data out=" << out << " seed=" << seed << " per-class=" << per_class
              << " sep=" << sep << " noise=" << noise << " session-shift=" << session_shift
              << "\n";
    SynthConfig config;
    config.per_class_per_session = per_class;
    config.class_separation = sep;
    config.noise = noise;
    config.session_shift = session_shift;
    config.seed = seed;
    const Dataset ds = generate_synthetic(config);
    save_csv(ds, out, seed);
    std::cerr << "wrote " << ds.size() << " rows to " << out << "\n";
    return 0;
}

void check_cli_spec(const AnsatzSpec &spec, bool allow_small) {
    const SearchSpace space;
    const int n_min = allow_small ? kMinQubits : space.n_min;
    if (spec.num_qubits < n_min || spec.num_qubits > space.n_max)
        throw std::invalid_argument(
            "--qubits must be in [" + std::to_string(space.n_min) + ", " +
            std::to_string(space.n_max) + "]" +
            (allow_small ? "" : " (pass --allow-small to go down to 2)") + ", got " +
            std::to_string(spec.num_qubits));
    if (spec.num_layers < space.layers_min || spec.num_layers > space.layers_max)
        throw std::invalid_argument("--layers must be in [1, 5], got " +
                                    std::to_string(spec.num_layers));
}

int cmd_train(const std::string &data, const std::string &embedding, const std::string &ansatz,
              int qubits, int layers, double lr, std::uint64_t seed, int epochs, int batch,
              const std::string &checkpoint, const std::string &metrics, bool allow_small,
              const std::string &grad) {
    AnsatzSpec spec;
    spec.embedding = parse_embedding(embedding);
    spec.variational = parse_variational(ansatz);
    spec.num_qubits = qubits;
    spec.num_layers = layers;
    spec.structure_seed = seed;
    check_cli_spec(spec, allow_small);

    GradEngine engine;
    if (grad == "adjoint")
        engine = GradEngine::Adjoint;
    else if (grad == "shift")
        engine = GradEngine::ParamShift;
    else
        throw std::invalid_argument("--grad must be adjoint or shift, got " + grad);

    std::cerr << "# train data=" << data << " embedding=" << embedding << " ansatz=" << ansatz
              << " qubits=" << qubits << " layers=" << layers << " lr=" << lr << " seed=" << seed
              << " epochs=" << epochs << " batch=" << batch << " grad=" << grad << "\n";

    PreparedData d = prepare(data, 0.2, seed);
    TrainableQnn trainable{QnnModel::init(spec, seed), engine};
    std::cerr << "ansatz " << ansatz << " n=" << qubits << " L=" << layers << ": "
              << trainable.model.circuit.variational_slot_count() << " variational parameters, "
              << trainable.model.trainable_count() << " trainable total\n";
    std::cerr << "rows: train=" << d.train.size() << " val=" << d.val.size()
              << " test=" << d.test.size() << "\n";

    TrainConfig config;
    config.batch_size = batch;
    config.max_epochs = epochs;
    config.lr0 = lr;
    config.seed = seed;

    const auto started = std::chrono::steady_clock::now();
    const TrainResult result = train(trainable, d.train, d.val, config,
                                     [&](const EpochMetrics &m, const std::vector<EpochMetrics> &) {
                                         std::cerr << "epoch " << m.epoch << " train_loss "
                                                   << m.train_loss << " val_loss " << m.val_loss
                                                   << " val_acc " << m.val_acc << " lr " << m.lr
                                                   << "\n";
                                         return ObserverDecision::Continue;
                                     });
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (!metrics.empty()) write_metrics_csv(result.history, metrics);
    if (!checkpoint.empty())
        save_checkpoint(Checkpoint::of(trainable.model, d.scaler, seed), checkpoint);

    const auto [test_loss, test_acc] = evaluate(trainable, d.test);
    JsonWriter w;
    w.begin_object();
    w.kv("status", run_status_name(result.status));
    w.kv("epochs_run", static_cast<long long>(result.history.size()));
    if (!result.history.empty()) {
        w.kv("train_loss", result.history.back().train_loss);
        w.kv("val_loss", result.history.back().val_loss);
        w.kv("val_acc", result.history.back().val_acc);
    }
    w.kv("test_loss", test_loss);
    w.kv("test_acc", test_acc);
    w.kv("variational_params",
         static_cast<long long>(trainable.model.circuit.variational_slot_count()));
    w.kv("trainable_params", trainable.model.trainable_count());
    w.kv("wall_s", elapsed);
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

int cmd_search(const std::string &data, int trials, std::uint64_t seed, const std::string &store_path,
               int max_epochs, int batch, int workers) {
    std::cerr << "# search data=" << data << " trials=" << trials << " seed=" << seed
              << " store=" << store_path << " max-epochs=" << max_epochs << " batch=" << batch
              << " workers=" << workers << "\n";
    const Dataset full = load_csv(data);

    SearchConfig config;
    config.n_trials = trials;
    config.master_seed = seed;
    config.base_train.max_epochs = max_epochs;
    config.base_train.batch_size = batch;
    config.workers = workers;
    const auto started = std::chrono::steady_clock::now();
    config.on_trial = [&](const TrialRecord &t) {
        std::cerr << "trial " << t.id << " " << embedding_name(t.config.embedding) << "/"
                  << variational_name(t.config.variational) << " n=" << t.config.num_qubits
                  << " L=" << t.config.num_layers << " lr0=" << t.config.lr0 << " -> "
                  << run_status_name(t.status) << " after " << t.epochs.size() << " epochs"
                  << ", val_loss " << t.final.val_loss << "\n";
    };

    TrialStore store(store_path);
    const SearchResult result = run_search(full, config, store);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cerr << "search finished in " << elapsed << " s; pruned fraction "
              << result.pruned_fraction << "\n";

    JsonWriter w;
    w.begin_object();
    w.kv("trials", trials);
    w.kv("pruned_fraction", result.pruned_fraction);
    w.kv("completed", result.completed);
    w.kv("diverged", result.diverged);
    w.key("best").begin_object();
    w.kv("id", result.best.id);
    w.kv("embedding", embedding_name(result.best.config.embedding));
    w.kv("variational", variational_name(result.best.config.variational));
    w.kv("n", result.best.config.num_qubits);
    w.kv("L", result.best.config.num_layers);
    w.kv("lr0", result.best.config.lr0);
    w.kv("val_loss", result.best.final.val_loss);
    w.kv("val_acc", result.best.final.val_acc);
    w.kv("test_acc", result.best.final.test_acc);
    w.kv("param_count", result.best.param_count);
    w.end_object();
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

void emit(const std::string &text, const std::string &out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + out_path);
}

int cmd_report(const std::string &store_path, const std::string &kind, const std::string &param,
               const std::string &params, const std::string &out_path, int resolution,
               double radius, std::uint64_t seed) {
    std::cerr << "# report store=" << store_path << " kind=" << kind << " param=" << param
              << " params=" << params << " out=" << out_path << " seed=" << seed << "\n";
    const auto records = TrialStore::load(store_path);

    if (kind == "scatter") {
        emit(scatter_export(records), out_path);
    } else if (kind == "slice") {
        if (param.empty()) throw std::invalid_argument("--kind slice requires --param");
        emit(slice_export(records, parse_hyper_param(param)), out_path);
    } else if (kind == "contour") {
        const auto comma = params.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("--kind contour requires --params a,b");
        ContourOptions options;
        options.resolution = resolution;
        options.radius = radius;
        emit(contour_export(records, parse_hyper_param(params.substr(0, comma)),
                            parse_hyper_param(params.substr(comma + 1)), options),
             out_path);
    } else if (kind == "importance") {
        const ImportanceReport report = fanova_importance(records, seed);
        if (!out_path.empty()) emit(importance_to_csv(report), out_path);
        std::cout << importance_to_json(report) << "\n";
    } else {
        throw std::invalid_argument("unknown --kind: " + kind +
                                    " (expected scatter|slice|contour|importance)");
    }
    return 0;
}

int cmd_baselines(const std::string &data, const std::string &model, std::uint64_t seed, int k,
                  int epochs, const std::string &metrics) {
    std::cerr << "# baselines data=" << data << " model=" << model << " seed=" << seed
              << " k=" << k << " epochs=" << epochs << "\n";
    if (model != "all" && model != "mlp" && model != "knn" && model != "gnb")
        throw std::invalid_argument("--model must be all|mlp|knn|gnb, got " + model);
    PreparedData d = prepare(data, 0.2, seed);
    std::cerr << "rows: train=" << d.train.size() << " val=" << d.val.size()
              << " test=" << d.test.size() << "\n";

    JsonWriter w;
    w.begin_object();
    if (model == "all" || model == "mlp") {
        MlpModel mlp = MlpModel::init(seed);
        TrainConfig config;
        config.max_epochs = epochs;
        config.seed = seed;
        const TrainResult result = train(mlp, d.train, d.val, config);
        if (!metrics.empty()) write_metrics_csv(result.history, metrics);
        const auto [loss, acc] = evaluate(mlp, d.test);
        std::cerr << "mlp: status " << run_status_name(result.status) << ", test_acc " << acc
                  << "\n";
        w.key("mlp").begin_object();
        w.kv("status", run_status_name(result.status));
        w.kv("epochs_run", static_cast<long long>(result.history.size()));
        w.kv("test_loss", loss);
        w.kv("test_acc", acc);
        w.kv("params", mlp_param_count());
        w.end_object();
    }
    if (model == "all" || model == "knn") {
        int correct = 0;
        for (const auto &row : d.test.rows)
            if (knn_predict(d.train, row.x, k) == row.label) ++correct;
        const double acc = static_cast<double>(correct) / static_cast<double>(d.test.size());
        std::cerr << "knn (k=" << k << "): test_acc " << acc << "\n";
        w.key("knn").begin_object();
        w.kv("k", k);
        w.kv("test_acc", acc);
        w.end_object();
    }
    if (model == "all" || model == "gnb") {
        const GnbModel gnb = gnb_fit(d.train);
        int correct = 0;
        for (const auto &row : d.test.rows)
            if (gnb_predict(gnb, row.x) == row.label) ++correct;
        const double acc = static_cast<double>(correct) / static_cast<double>(d.test.size());
        std::cerr << "gnb: test_acc " << acc << "\n";
        w.key("gnb").begin_object();
        w.kv("test_acc", acc);
        w.end_object();
    }
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"AutoAnsatz: variational quantum classifier toolkit with automated "
                 "ansatz/hyperparameter search"};
    app.require_subcommand(1);

    // gen-data
    auto *gen = app.add_subcommand("gen-data", "Generate a synthetic beam-SNR-like dataset CSV");
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    int gen_per_class = 200;
    double gen_sep = 3.0, gen_noise = 1.0, gen_shift = 0.5;
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--per-class", gen_per_class, "Samples per class per session");
    gen->add_option("--sep", gen_sep, "Class separation scale");
    gen->add_option("--noise", gen_noise, "Within-class noise scale");
    gen->add_option("--session-shift", gen_shift, "Session offset scale");

    // train
    auto *tr = app.add_subcommand("train", "Train one hybrid classifier");
    std::string tr_data, tr_embedding = "angle", tr_ansatz = "s2d", tr_checkpoint, tr_metrics,
                tr_grad = "adjoint";
    int tr_qubits = 10, tr_layers = 1, tr_epochs = 100, tr_batch = 100;
    double tr_lr = 0.02;
    std::uint64_t tr_seed = 0;
    bool tr_allow_small = false;
    tr->add_option("--data", tr_data, "Dataset CSV")->required();
    tr->add_option("--embedding", tr_embedding, "angle|iqp");
    tr->add_option("--ansatz", tr_ansatz, "s2d|qaoa|ttn|mps|strong|basic|random");
    tr->add_option("--qubits", tr_qubits, "Qubit count");
    tr->add_option("--layers", tr_layers, "Entangling layer count");
    tr->add_option("--lr", tr_lr, "Initial learning rate");
    tr->add_option("--seed", tr_seed, "Init/shuffle seed");
    tr->add_option("--epochs", tr_epochs, "Maximum epochs");
    tr->add_option("--batch", tr_batch, "Mini-batch size");
    tr->add_option("--checkpoint", tr_checkpoint, "Write model checkpoint JSON here");
    tr->add_option("--metrics", tr_metrics, "Write per-epoch metrics CSV here");
    tr->add_flag("--allow-small", tr_allow_small, "Allow qubit counts below 5");
    tr->add_option("--grad", tr_grad, "Gradient engine: adjoint|shift");

    // search
    auto *se = app.add_subcommand("search", "Run the AutoAnsatz trial search");
    std::string se_data, se_store;
    int se_trials = 60, se_max_epochs = 100, se_batch = 100, se_workers = 1;
    std::uint64_t se_seed = 0;
    se->add_option("--data", se_data, "Dataset CSV")->required();
    se->add_option("--trials", se_trials, "Number of trials");
    se->add_option("--seed", se_seed, "Master seed");
    se->add_option("--store", se_store, "Trial store output path (JSON lines)")->required();
    se->add_option("--max-epochs", se_max_epochs, "Per-trial epoch cap");
    se->add_option("--batch", se_batch, "Mini-batch size");
    se->add_option("--workers", se_workers, "Parallel trial workers");

    // report
    auto *re = app.add_subcommand("report", "Export analysis tables from a trial store");
    std::string re_store, re_kind, re_param, re_params, re_out;
    int re_resolution = 20;
    double re_radius = 0.75;
    std::uint64_t re_seed = 0;
    re->add_option("--store", re_store, "Trial store path")->required();
    re->add_option("--kind", re_kind, "scatter|slice|contour|importance")->required();
    re->add_option("--param", re_param, "Parameter for slice");
    re->add_option("--params", re_params, "Two parameters for contour, e.g. n,L");
    re->add_option("--out", re_out, "Output path (stdout when omitted)");
    re->add_option("--resolution", re_resolution, "Contour cells per numeric axis");
    re->add_option("--radius", re_radius, "Contour smoothing radius (normalized)");
    re->add_option("--seed", re_seed, "Importance forest seed");

    // baselines
    auto *ba = app.add_subcommand("baselines", "Train/evaluate the classical reference models");
    std::string ba_data, ba_model = "all", ba_metrics;
    std::uint64_t ba_seed = 0;
    int ba_k = 5, ba_epochs = 100;
    ba->add_option("--data", ba_data, "Dataset CSV")->required();
    ba->add_option("--model", ba_model, "all|mlp|knn|gnb");
    ba->add_option("--seed", ba_seed, "Init/shuffle seed");
    ba->add_option("--k", ba_k, "kNN neighbor count");
    ba->add_option("--epochs", ba_epochs, "MLP epoch cap");
    ba->add_option("--metrics", ba_metrics, "Write MLP metrics CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_out, gen_seed, gen_per_class, gen_sep, gen_noise, gen_shift);
        if (tr->parsed())
            return cmd_train(tr_data, tr_embedding, tr_ansatz, tr_qubits, tr_layers, tr_lr,
                             tr_seed, tr_epochs, tr_batch, tr_checkpoint, tr_metrics,
                             tr_allow_small, tr_grad);
        if (se->parsed())
            return cmd_search(se_data, se_trials, se_seed, se_store, se_max_epochs, se_batch,
                              se_workers);
        if (re->parsed())
            return cmd_report(re_store, re_kind, re_param, re_params, re_out, re_resolution,
                              re_radius, re_seed);
        if (ba->parsed())
            return cmd_baselines(ba_data, ba_model, ba_seed, ba_k, ba_epochs, ba_metrics);
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
