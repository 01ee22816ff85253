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
 * Post-search analytics over a trial store: plot-ready CSV exports
 * (scatter, per-parameter slices, pairwise contour grids) and a
 * first-order fANOVA importance score.
 *
 * fANOVA here fits a seeded random-forest regressor (32 trees, depth 8,
 * bootstrap) from configs to validation loss, with categoricals one-hot
 * encoded and lr0 in log10. Each tree partitions the config space into
 * boxes; marginalizing the piecewise-constant prediction over all but one
 * hyperparameter (weighting leaves by their volume share over the
 * empirical ranges) gives that parameter's first-order variance
 * contribution. Interactions land in the residual bucket.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "autoansatz/automl.hpp"
#include "autoansatz/json_io.hpp"
#include "autoansatz/rng.hpp"

namespace autoansatz {

/// Hyperparameters, in export order.
enum class HyperParam : int { Embedding = 0, Variational = 1, Qubits = 2, Layers = 3, Lr0 = 4 };
constexpr int kNumHyperParams = 5;

inline const char *hyper_param_name(HyperParam p) {
    switch (p) {
        case HyperParam::Embedding: return "embedding";
        case HyperParam::Variational: return "variational";
        case HyperParam::Qubits: return "n";
        case HyperParam::Layers: return "L";
        case HyperParam::Lr0: return "lr0";
    }
    return "?";
}

inline HyperParam parse_hyper_param(const std::string &name) {
    for (int p = 0; p < kNumHyperParams; ++p)
        if (name == hyper_param_name(static_cast<HyperParam>(p)))
            return static_cast<HyperParam>(p);
    throw std::invalid_argument("unknown hyperparameter name: " + name);
}

inline bool is_categorical(HyperParam p) {
    return p == HyperParam::Embedding || p == HyperParam::Variational;
}

inline int category_count(HyperParam p) {
    return p == HyperParam::Embedding ? kNumEmbeddingKinds : kNumVariationalKinds;
}

/// Numeric coordinate of a trial for one parameter (category index for
/// categoricals, log10 for lr0).
inline double param_value(const TrialRecord &t, HyperParam p) {
    switch (p) {
        case HyperParam::Embedding: return static_cast<double>(t.config.embedding);
        case HyperParam::Variational: return static_cast<double>(t.config.variational);
        case HyperParam::Qubits: return static_cast<double>(t.config.num_qubits);
        case HyperParam::Layers: return static_cast<double>(t.config.num_layers);
        case HyperParam::Lr0: return std::log10(t.config.lr0);
    }
    return 0.0;
}

struct ImportanceReport {
    std::array<double, kNumHyperParams> importance{}; // first-order shares
    double residual = 1.0;                            // interactions + noise
};

namespace fanova_detail {

constexpr int kTrees = 32;
constexpr int kMaxDepth = 8;
constexpr int kMinSamplesSplit = 4;

// One-hot feature layout: [emb x2][var x7][n][L][log10 lr0]
constexpr int kEmbOffset = 0;
constexpr int kVarOffset = kNumEmbeddingKinds;
constexpr int kNumericOffset = kNumEmbeddingKinds + kNumVariationalKinds;
constexpr int kFeatureCount = kNumericOffset + 3;

inline std::vector<double> featurize(const TrialRecord &t) {
    std::vector<double> x(kFeatureCount, 0.0);
    x[static_cast<std::size_t>(kEmbOffset + static_cast<int>(t.config.embedding))] = 1.0;
    x[static_cast<std::size_t>(kVarOffset + static_cast<int>(t.config.variational))] = 1.0;
    x[kNumericOffset + 0] = static_cast<double>(t.config.num_qubits);
    x[kNumericOffset + 1] = static_cast<double>(t.config.num_layers);
    x[kNumericOffset + 2] = std::log10(t.config.lr0);
    return x;
}

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
};

inline int build_node(Tree &tree, const std::vector<std::vector<double>> &x,
                      const std::vector<double> &y, std::vector<int> &rows, int begin, int end,
                      int depth) {
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});

    double sum = 0.0, sum_sq = 0.0;
    for (int i = begin; i < end; ++i) {
        sum += y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
        sum_sq += y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] *
                  y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    }
    const int count = end - begin;
    tree.nodes[static_cast<std::size_t>(node_index)].value = sum / count;
    const double node_sse = sum_sq - sum * sum / count;

    if (depth >= kMaxDepth || count < kMinSamplesSplit || node_sse <= 1e-15)
        return node_index;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = node_sse - 1e-12;
    std::vector<std::pair<double, double>> column(static_cast<std::size_t>(count));
    for (int f = 0; f < kFeatureCount; ++f) {
        for (int i = 0; i < count; ++i) {
            const int row = rows[static_cast<std::size_t>(begin + i)];
            column[static_cast<std::size_t>(i)] = {x[static_cast<std::size_t>(row)][static_cast<std::size_t>(f)],
                                                   y[static_cast<std::size_t>(row)]};
        }
        std::sort(column.begin(), column.end());
        double left_sum = 0.0, left_sq = 0.0;
        for (int i = 0; i + 1 < count; ++i) {
            left_sum += column[static_cast<std::size_t>(i)].second;
            left_sq += column[static_cast<std::size_t>(i)].second * column[static_cast<std::size_t>(i)].second;
            if (column[static_cast<std::size_t>(i)].first ==
                column[static_cast<std::size_t>(i + 1)].first)
                continue;
            const int nl = i + 1, nr = count - nl;
            const double right_sum = sum - left_sum;
            const double right_sq = sum_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / nl) +
                               (right_sq - right_sum * right_sum / nr);
            if (sse < best_sse) {
                best_sse = sse;
                best_feature = f;
                best_threshold = 0.5 * (column[static_cast<std::size_t>(i)].first +
                                        column[static_cast<std::size_t>(i + 1)].first);
            }
        }
    }
    if (best_feature < 0) return node_index;

    const auto middle = std::partition(rows.begin() + begin, rows.begin() + end, [&](int row) {
        return x[static_cast<std::size_t>(row)][static_cast<std::size_t>(best_feature)] <=
               best_threshold;
    });
    const int split = static_cast<int>(middle - rows.begin());
    if (split == begin || split == end) return node_index;

    tree.nodes[static_cast<std::size_t>(node_index)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(node_index)].threshold = best_threshold;
    const int left = build_node(tree, x, y, rows, begin, split, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].left = left;
    const int right = build_node(tree, x, y, rows, split, end, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
}

/// A leaf as a box over the five hyperparameters: a category subset per
/// categorical, an interval per numeric dimension.
struct LeafBox {
    double value = 0.0;
    std::array<std::vector<bool>, 2> allowed;      // embedding, variational
    std::array<std::pair<double, double>, 3> span; // n, L, log10 lr0
};

struct NumericDomain {
    double lo = 0.0, hi = 1.0;
    double width() const { return hi - lo; }
};

inline void collect_leaves(const Tree &tree, int node, LeafBox box, std::vector<LeafBox> &out) {
    const TreeNode &tn = tree.nodes[static_cast<std::size_t>(node)];
    if (tn.feature < 0) {
        box.value = tn.value;
        out.push_back(std::move(box));
        return;
    }
    LeafBox left = box, right = box;
    if (tn.feature < kNumericOffset) {
        // one-hot column: left branch (<= t, i.e. 0) excludes the category,
        // right branch pins it
        const bool is_var = tn.feature >= kVarOffset;
        const int cat = is_var ? tn.feature - kVarOffset : tn.feature;
        auto &left_allowed = left.allowed[is_var ? 1 : 0];
        auto &right_allowed = right.allowed[is_var ? 1 : 0];
        left_allowed[static_cast<std::size_t>(cat)] = false;
        for (std::size_t c = 0; c < right_allowed.size(); ++c)
            right_allowed[c] = right_allowed[c] && (static_cast<int>(c) == cat);
    } else {
        const int d = tn.feature - kNumericOffset;
        left.span[static_cast<std::size_t>(d)].second =
            std::min(left.span[static_cast<std::size_t>(d)].second, tn.threshold);
        right.span[static_cast<std::size_t>(d)].first =
            std::max(right.span[static_cast<std::size_t>(d)].first, tn.threshold);
    }
    collect_leaves(tree, tn.left, std::move(left), out);
    collect_leaves(tree, tn.right, std::move(right), out);
}

/// Fraction of parameter p's domain covered by the leaf.
inline double volume_share(const LeafBox &box, int p,
                           const std::array<NumericDomain, 3> &domains,
                           const std::array<int, 2> &observed_counts) {
    if (p < 2) {
        int allowed = 0;
        for (bool a : box.allowed[static_cast<std::size_t>(p)])
            if (a) ++allowed;
        return static_cast<double>(allowed) / observed_counts[static_cast<std::size_t>(p)];
    }
    const int d = p - 2;
    const auto &domain = domains[static_cast<std::size_t>(d)];
    if (domain.width() <= 0.0) return 1.0; // degenerate dimension
    const double lo = std::max(box.span[static_cast<std::size_t>(d)].first, domain.lo);
    const double hi = std::min(box.span[static_cast<std::size_t>(d)].second, domain.hi);
    return std::max(0.0, hi - lo) / domain.width();
}

} // namespace fanova_detail

/// First-order fANOVA importances from a trial set. Requires at least 20
/// trials with a finite objective. Deterministic given trials and seed.
inline ImportanceReport fanova_importance(const std::vector<TrialRecord> &trials,
                                          std::uint64_t seed = 0) {
    using namespace fanova_detail;
    std::vector<const TrialRecord *> usable;
    for (const auto &t : trials)
        if (std::isfinite(t.objective())) usable.push_back(&t);
    if (usable.size() < 20)
        throw std::invalid_argument("fanova_importance: need at least 20 trials with a finite "
                                    "objective, got " +
                                    std::to_string(usable.size()));

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto *t : usable) {
        x.push_back(featurize(*t));
        y.push_back(t->objective());
    }

    // empirical ranges: observed categories and numeric min/max
    std::array<std::set<int>, 2> observed_cats;
    std::array<NumericDomain, 3> domains;
    for (int d = 0; d < 3; ++d) {
        domains[static_cast<std::size_t>(d)].lo = std::numeric_limits<double>::infinity();
        domains[static_cast<std::size_t>(d)].hi = -std::numeric_limits<double>::infinity();
    }
    for (const auto &row : x) {
        for (int c = 0; c < kNumEmbeddingKinds; ++c)
            if (row[static_cast<std::size_t>(kEmbOffset + c)] > 0.5) observed_cats[0].insert(c);
        for (int c = 0; c < kNumVariationalKinds; ++c)
            if (row[static_cast<std::size_t>(kVarOffset + c)] > 0.5) observed_cats[1].insert(c);
        for (int d = 0; d < 3; ++d) {
            auto &dom = domains[static_cast<std::size_t>(d)];
            dom.lo = std::min(dom.lo, row[static_cast<std::size_t>(kNumericOffset + d)]);
            dom.hi = std::max(dom.hi, row[static_cast<std::size_t>(kNumericOffset + d)]);
        }
    }
    const std::array<int, 2> observed_counts{static_cast<int>(observed_cats[0].size()),
                                             static_cast<int>(observed_cats[1].size())};

    ImportanceReport report;
    report.importance.fill(0.0);
    Rng rng(derive_seed(seed, 0xfa0));
    double tree_weight = 0.0;

    for (int tree_index = 0; tree_index < kTrees; ++tree_index) {
        std::vector<int> rows(usable.size());
        for (auto &r : rows) r = rng.uniform_int(0, static_cast<int>(usable.size()) - 1);
        Tree tree;
        build_node(tree, x, y, rows, 0, static_cast<int>(rows.size()), 0);

        LeafBox root;
        root.allowed[0].assign(kNumEmbeddingKinds, false);
        for (int c : observed_cats[0]) root.allowed[0][static_cast<std::size_t>(c)] = true;
        root.allowed[1].assign(kNumVariationalKinds, false);
        for (int c : observed_cats[1]) root.allowed[1][static_cast<std::size_t>(c)] = true;
        for (int d = 0; d < 3; ++d)
            root.span[static_cast<std::size_t>(d)] = {-std::numeric_limits<double>::infinity(),
                                                      std::numeric_limits<double>::infinity()};
        std::vector<LeafBox> leaves;
        collect_leaves(tree, 0, root, leaves);

        // total variance of the tree under the uniform product measure
        double mean = 0.0, mean_sq = 0.0;
        std::vector<double> volumes(leaves.size());
        for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
            double vol = 1.0;
            for (int p = 0; p < kNumHyperParams; ++p)
                vol *= volume_share(leaves[leaf], p, domains, observed_counts);
            volumes[leaf] = vol;
            mean += leaves[leaf].value * vol;
            mean_sq += leaves[leaf].value * leaves[leaf].value * vol;
        }
        const double total_var = mean_sq - mean * mean;
        tree_weight += 1.0;
        if (total_var <= 1e-15) continue; // constant tree adds nothing

        for (int p = 0; p < kNumHyperParams; ++p) {
            // variance of the marginal prediction over parameter p
            double var_p = 0.0;
            if (p < 2) {
                const int cardinality = observed_counts[static_cast<std::size_t>(p)];
                double marg_mean = 0.0, marg_sq = 0.0;
                for (int c = 0; c < static_cast<int>(root.allowed[static_cast<std::size_t>(p)].size()); ++c) {
                    if (!root.allowed[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)]) continue;
                    double pred = 0.0;
                    for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
                        if (!leaves[leaf].allowed[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)])
                            continue;
                        const double share = volume_share(leaves[leaf], p, domains, observed_counts);
                        if (share <= 0.0) continue;
                        pred += leaves[leaf].value * volumes[leaf] / share;
                    }
                    marg_mean += pred / cardinality;
                    marg_sq += pred * pred / cardinality;
                }
                var_p = marg_sq - marg_mean * marg_mean;
            } else {
                const int d = p - 2;
                const auto &domain = domains[static_cast<std::size_t>(d)];
                if (domain.width() <= 0.0) continue;
                // segment the axis by every leaf boundary
                std::vector<double> cuts{domain.lo, domain.hi};
                for (const auto &leaf : leaves) {
                    const double lo = leaf.span[static_cast<std::size_t>(d)].first;
                    const double hi = leaf.span[static_cast<std::size_t>(d)].second;
                    if (lo > domain.lo && lo < domain.hi) cuts.push_back(lo);
                    if (hi > domain.lo && hi < domain.hi) cuts.push_back(hi);
                }
                std::sort(cuts.begin(), cuts.end());
                cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
                double marg_mean = 0.0, marg_sq = 0.0;
                for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
                    const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
                    const double weight = (cuts[s + 1] - cuts[s]) / domain.width();
                    double pred = 0.0;
                    for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
                        const auto &span = leaves[leaf].span[static_cast<std::size_t>(d)];
                        if (mid < span.first || mid >= span.second) continue;
                        const double share = volume_share(leaves[leaf], p, domains, observed_counts);
                        if (share <= 0.0) continue;
                        pred += leaves[leaf].value * volumes[leaf] / share;
                    }
                    marg_mean += pred * weight;
                    marg_sq += pred * pred * weight;
                }
                var_p = marg_sq - marg_mean * marg_mean;
            }
            report.importance[static_cast<std::size_t>(p)] += std::max(0.0, var_p / total_var);
        }
    }

    for (auto &v : report.importance) v /= tree_weight;
    double sum = 0.0;
    for (double v : report.importance) sum += v;
    report.residual = 1.0 - sum;
    return report;
}

// --- table exports -----------------------------------------------------------

/// Display value of a parameter for CSV output.
inline std::string param_display(const TrialRecord &t, HyperParam p) {
    switch (p) {
        case HyperParam::Embedding: return embedding_name(t.config.embedding);
        case HyperParam::Variational: return variational_name(t.config.variational);
        case HyperParam::Qubits: return std::to_string(t.config.num_qubits);
        case HyperParam::Layers: return std::to_string(t.config.num_layers);
        case HyperParam::Lr0: return detail::format_double(t.config.lr0);
    }
    return "";
}

/// One row per finite-objective trial, sorted by the parameter value
/// (categoricals in serialization order), ties by trial id.
inline std::string slice_export(const std::vector<TrialRecord> &trials, HyperParam p) {
    std::vector<const TrialRecord *> rows;
    for (const auto &t : trials)
        if (std::isfinite(t.objective())) rows.push_back(&t);
    std::sort(rows.begin(), rows.end(), [&](const TrialRecord *a, const TrialRecord *b) {
        const double av = param_value(*a, p), bv = param_value(*b, p);
        if (av != bv) return av < bv;
        return a->id < b->id;
    });
    std::string out = std::string(hyper_param_name(p)) + ",val_loss,trial_id,status\n";
    for (const auto *t : rows)
        out += param_display(*t, p) + "," + detail::format_double(t->objective()) + "," +
               std::to_string(t->id) + "," + run_status_name(t->status) + "\n";
    return out;
}

/// param_count, test accuracy and ansatz tag of every completed trial.
inline std::string scatter_export(const std::vector<TrialRecord> &trials) {
    std::string out = "param_count,test_acc,variational\n";
    for (const auto &t : trials) {
        if (t.status != RunStatus::Completed) continue;
        out += std::to_string(t.param_count) + "," + detail::format_double(t.final.test_acc) +
               "," + variational_name(t.config.variational) + "\n";
    }
    return out;
}

struct ContourOptions {
    int resolution = 20;   // cells per numeric axis
    double radius = 0.75;  // smoothing radius in normalized axis units
};

namespace contour_detail {

struct Axis {
    HyperParam param;
    std::vector<double> cell_values;    // coordinate of each cell center
    std::vector<std::string> cell_text; // display form

    static Axis build(HyperParam p, int resolution, const SearchSpace &space) {
        Axis axis{p, {}, {}};
        if (is_categorical(p)) {
            for (int c = 0; c < category_count(p); ++c) {
                axis.cell_values.push_back(static_cast<double>(c));
                axis.cell_text.push_back(p == HyperParam::Embedding
                                             ? embedding_name(static_cast<EmbeddingKind>(c))
                                             : variational_name(static_cast<VariationalKind>(c)));
            }
            return axis;
        }
        double lo = 0.0, hi = 1.0;
        switch (p) {
            case HyperParam::Qubits: lo = space.n_min; hi = space.n_max; break;
            case HyperParam::Layers: lo = space.layers_min; hi = space.layers_max; break;
            case HyperParam::Lr0: lo = std::log10(space.lr_min); hi = std::log10(space.lr_max); break;
            default: break;
        }
        for (int i = 0; i < resolution; ++i) {
            const double v = lo + (i + 0.5) * (hi - lo) / resolution;
            axis.cell_values.push_back(v);
            axis.cell_text.push_back(detail::format_double(p == HyperParam::Lr0 ? std::pow(10.0, v) : v));
        }
        return axis;
    }

    double lo() const { return is_categorical(param) ? 0.0 : cell_values.front(); }
    double hi() const { return is_categorical(param) ? 0.0 : cell_values.back(); }

    /// Normalized distance between a cell center and a trial coordinate.
    double distance(double cell, double trial) const {
        if (is_categorical(param)) return cell == trial ? 0.0 : 1.0;
        const double width = hi() - lo();
        if (width <= 0.0) return 0.0;
        return std::abs(cell - trial) / width;
    }
};

} // namespace contour_detail

/// Inverse-distance-weighted objective over a 2-d grid. Cells with no
/// trial inside the smoothing radius stay empty.
inline std::string contour_export(const std::vector<TrialRecord> &trials, HyperParam pa,
                                  HyperParam pb, const ContourOptions &options = {},
                                  const SearchSpace &space = {}) {
    if (pa == pb) throw std::invalid_argument("contour_export: parameters must differ");
    if (options.resolution < 2)
        throw std::invalid_argument("contour_export: resolution must be >= 2");
    using contour_detail::Axis;
    const Axis axis_a = Axis::build(pa, options.resolution, space);
    const Axis axis_b = Axis::build(pb, options.resolution, space);

    std::vector<const TrialRecord *> rows;
    for (const auto &t : trials)
        if (std::isfinite(t.objective())) rows.push_back(&t);

    std::string out = std::string(hyper_param_name(pa)) + "," + hyper_param_name(pb) + ",val_loss\n";
    for (std::size_t ia = 0; ia < axis_a.cell_values.size(); ++ia) {
        for (std::size_t ib = 0; ib < axis_b.cell_values.size(); ++ib) {
            double weight_sum = 0.0, value_sum = 0.0;
            for (const auto *t : rows) {
                const double da = axis_a.distance(axis_a.cell_values[ia], param_value(*t, pa));
                const double db = axis_b.distance(axis_b.cell_values[ib], param_value(*t, pb));
                const double dist = std::sqrt(da * da + db * db);
                if (dist > options.radius) continue;
                const double w = 1.0 / (dist * dist + 1e-9);
                weight_sum += w;
                value_sum += w * t->objective();
            }
            out += axis_a.cell_text[ia] + "," + axis_b.cell_text[ib] + ",";
            if (weight_sum > 0.0) out += detail::format_double(value_sum / weight_sum);
            out += "\n";
        }
    }
    return out;
}

inline std::string importance_to_csv(const ImportanceReport &report) {
    std::string out = "param,importance\n";
    for (int p = 0; p < kNumHyperParams; ++p)
        out += std::string(hyper_param_name(static_cast<HyperParam>(p))) + "," +
               detail::format_double(report.importance[static_cast<std::size_t>(p)]) + "\n";
    out += "residual," + detail::format_double(report.residual) + "\n";
    return out;
}

inline std::string importance_to_json(const ImportanceReport &report) {
    JsonWriter w;
    w.begin_object();
    for (int p = 0; p < kNumHyperParams; ++p)
        w.kv(hyper_param_name(static_cast<HyperParam>(p)),
             report.importance[static_cast<std::size_t>(p)]);
    w.kv("residual", report.residual);
    w.end_object();
    return w.str();
}

} // namespace autoansatz
