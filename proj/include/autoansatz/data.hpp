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
 * Synthetic beam-SNR-like datasets and the session-based train/test split.
 *
 * Rows carry 36 real features, a class label in [0, 8) and a session id in
 * [0, 7). Sessions 0-3 are the training sessions, 4-6 the test sessions.
 * The generator draws one prototype per class, one offset per session and
 * isotropic within-class noise, so the session offset acts as a
 * distribution-shift knob between the two splits.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoansatz/rng.hpp"

namespace autoansatz {

constexpr int kFeatureDim = 36;
constexpr int kNumClasses = 8;
constexpr int kNumSessions = 7;
constexpr int kTrainSessions = 4; // sessions 0..3 train, 4..6 test

struct Sample {
    std::array<double, kFeatureDim> x{};
    int label = 0;
    int session = 0;
};

struct Dataset {
    std::vector<Sample> rows;

    std::size_t size() const { return rows.size(); }
};

struct SynthConfig {
    int per_class_per_session = 200;
    double class_separation = 3.0;
    double noise = 1.0;
    double session_shift = 0.5;
    std::uint64_t seed = 0;
};

/// Draws the dataset: sample = prototype(class) + offset(session) + noise.
/// Fully determined by config.seed.
inline Dataset generate_synthetic(const SynthConfig &config) {
    if (config.per_class_per_session < 1)
        throw std::invalid_argument("generate_synthetic: per-class count must be >= 1");
    if (config.class_separation < 0 || config.noise < 0 || config.session_shift < 0)
        throw std::invalid_argument("generate_synthetic: scales must be >= 0");

    Rng rng(derive_seed(config.seed, 0xda7a));
    std::array<std::array<double, kFeatureDim>, kNumClasses> prototypes{};
    for (auto &proto : prototypes)
        for (auto &v : proto) v = rng.normal(0.0, config.class_separation);
    std::array<std::array<double, kFeatureDim>, kNumSessions> offsets{};
    for (auto &offset : offsets)
        for (auto &v : offset) v = rng.normal(0.0, config.session_shift);

    Dataset ds;
    ds.rows.reserve(static_cast<std::size_t>(kNumSessions) * kNumClasses *
                    config.per_class_per_session);
    for (int session = 0; session < kNumSessions; ++session) {
        for (int label = 0; label < kNumClasses; ++label) {
            for (int k = 0; k < config.per_class_per_session; ++k) {
                Sample s;
                s.label = label;
                s.session = session;
                for (int f = 0; f < kFeatureDim; ++f)
                    s.x[static_cast<std::size_t>(f)] =
                        prototypes[static_cast<std::size_t>(label)][static_cast<std::size_t>(f)] +
                        offsets[static_cast<std::size_t>(session)][static_cast<std::size_t>(f)] +
                        rng.normal(0.0, config.noise);
                ds.rows.push_back(s);
            }
        }
    }
    return ds;
}

struct SessionSplit {
    Dataset train; // sessions 0..3
    Dataset test;  // sessions 4..6
};

/// Splits by session id; requires every session 0..6 to be present.
inline SessionSplit split_by_session(const Dataset &ds) {
    std::set<int> seen;
    for (const auto &row : ds.rows) seen.insert(row.session);
    for (int s = 0; s < kNumSessions; ++s)
        if (!seen.count(s))
            throw std::invalid_argument("split_by_session: missing session " + std::to_string(s));
    SessionSplit split;
    for (const auto &row : ds.rows)
        (row.session < kTrainSessions ? split.train : split.test).rows.push_back(row);
    return split;
}

/// Seeded row-level shuffle split; `holdout_fraction` of rows go to the
/// second part. Used to carve the validation set out of the training
/// sessions.
inline std::pair<Dataset, Dataset> split_holdout(const Dataset &ds, double holdout_fraction,
                                                 std::uint64_t seed) {
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw std::invalid_argument("split_holdout: fraction must be in [0, 1)");
    std::vector<std::size_t> order(ds.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x5b11));
    rng.shuffle(order);
    const auto holdout = static_cast<std::size_t>(
        std::floor(holdout_fraction * static_cast<double>(order.size())));
    std::pair<Dataset, Dataset> parts;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < order.size() - holdout ? parts.first : parts.second)
            .rows.push_back(ds.rows[order[i]]);
    return parts;
}

/// Per-feature standardization with statistics from one (training) set.
struct Scaler {
    std::array<double, kFeatureDim> mean{};
    std::array<double, kFeatureDim> stddev{};

    static Scaler fit(const Dataset &ds) {
        if (ds.rows.empty()) throw std::invalid_argument("Scaler::fit: empty dataset");
        Scaler s;
        s.mean.fill(0.0);
        s.stddev.fill(0.0);
        for (const auto &row : ds.rows)
            for (int f = 0; f < kFeatureDim; ++f) s.mean[static_cast<std::size_t>(f)] += row.x[static_cast<std::size_t>(f)];
        const double inv = 1.0 / static_cast<double>(ds.rows.size());
        for (auto &m : s.mean) m *= inv;
        for (const auto &row : ds.rows)
            for (int f = 0; f < kFeatureDim; ++f) {
                const double d = row.x[static_cast<std::size_t>(f)] - s.mean[static_cast<std::size_t>(f)];
                s.stddev[static_cast<std::size_t>(f)] += d * d;
            }
        for (auto &v : s.stddev) {
            v = std::sqrt(v * inv);
            if (v < 1e-12) v = 1.0; // constant feature: leave it centered only
        }
        return s;
    }

    void apply(Dataset &ds) const {
        for (auto &row : ds.rows)
            for (int f = 0; f < kFeatureDim; ++f)
                row.x[static_cast<std::size_t>(f)] =
                    (row.x[static_cast<std::size_t>(f)] - mean[static_cast<std::size_t>(f)]) /
                    stddev[static_cast<std::size_t>(f)];
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_header() {
    std::string h = "label,session";
    for (int f = 0; f < kFeatureDim; ++f) h += ",f" + std::to_string(f);
    return h;
}

} // namespace detail

/// Writes `# seed=...` metadata, the fixed header, then one row per sample.
/// Doubles are printed with 17 significant digits so save/load round-trips
/// bit-exactly.
inline void save_csv(const Dataset &ds, const std::string &path, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    out << "# seed=" << seed << "\n" << detail::csv_header() << "\n";
    for (const auto &row : ds.rows) {
        out << row.label << ',' << row.session;
        for (double v : row.x) out << ',' << detail::format_double(v);
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

inline Dataset load_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != detail::csv_header())
                throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                         ": unexpected header");
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != static_cast<std::size_t>(kFeatureDim) + 2)
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(kFeatureDim + 2) + " columns, got " +
                                     std::to_string(cells.size()));
        auto parse_number = [&](const std::string &text, double &out_value) {
            char *end = nullptr;
            out_value = std::strtod(text.c_str(), &end);
            if (end == text.c_str() || *end != '\0')
                throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                         ": non-numeric cell '" + text + "'");
        };
        Sample s;
        double value = 0.0;
        parse_number(cells[0], value);
        s.label = static_cast<int>(value);
        if (s.label < 0 || s.label >= kNumClasses || value != s.label)
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                     ": label out of range [0, 8): " + cells[0]);
        parse_number(cells[1], value);
        s.session = static_cast<int>(value);
        if (s.session < 0 || s.session >= kNumSessions || value != s.session)
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                     ": session out of range [0, 7): " + cells[1]);
        for (int f = 0; f < kFeatureDim; ++f)
            parse_number(cells[static_cast<std::size_t>(f) + 2], s.x[static_cast<std::size_t>(f)]);
        ds.rows.push_back(s);
    }
    if (!header_seen) throw std::runtime_error("load_csv: no header in " + path);
    return ds;
}

} // namespace autoansatz
