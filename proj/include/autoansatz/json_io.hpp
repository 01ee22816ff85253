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
 * Deterministic JSON emission. Keys keep insertion order and doubles are
 * printed with 17 significant digits, which round-trips IEEE doubles
 * bit-exactly and keeps checkpoint and trial-store bytes stable across
 * runs. Parsing goes through nlohmann::json.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

namespace autoansatz {

class JsonWriter {
  public:
    JsonWriter &begin_object() { return punct('{'); }
    JsonWriter &end_object() { return close('}'); }
    JsonWriter &begin_array() { return punct('['); }
    JsonWriter &end_array() { return close(']'); }

    JsonWriter &key(const std::string &name) {
        separate();
        out_ += '"';
        escape(name);
        out_ += "\":";
        pending_value_ = true;
        return *this;
    }

    JsonWriter &value(double v) {
        separate();
        if (!std::isfinite(v)) {
            out_ += "null";
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out_ += buf;
        }
        return *this;
    }

    JsonWriter &value(long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }

    JsonWriter &value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter &value(unsigned long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }

    JsonWriter &value(const std::string &v) {
        separate();
        out_ += '"';
        escape(v);
        out_ += '"';
        return *this;
    }

    JsonWriter &value(const char *v) { return value(std::string(v)); }

    JsonWriter &value(bool v) {
        separate();
        out_ += v ? "true" : "false";
        return *this;
    }

    JsonWriter &null() {
        separate();
        out_ += "null";
        return *this;
    }

    template <typename T>
    JsonWriter &kv(const std::string &name, const T &v) {
        key(name);
        return value(v);
    }

    JsonWriter &number_array(const std::string &name, const std::vector<double> &values) {
        key(name);
        begin_array();
        for (double v : values) value(v);
        return end_array();
    }

    const std::string &str() const { return out_; }

  private:
    JsonWriter &punct(char c) {
        separate();
        out_ += c;
        need_comma_.push_back(false);
        return *this;
    }

    JsonWriter &close(char c) {
        out_ += c;
        need_comma_.pop_back();
        if (!need_comma_.empty()) need_comma_.back() = true;
        return *this;
    }

    void separate() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!need_comma_.empty()) {
            if (need_comma_.back()) out_ += ',';
            need_comma_.back() = true;
        }
    }

    void escape(const std::string &s) {
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default: out_ += c;
            }
        }
    }

    std::string out_;
    std::vector<bool> need_comma_;
    bool pending_value_ = false;
};

/// Reads a double that may have been stored as null (non-finite values).
inline double json_number_or_nan(const nlohmann::json &j) {
    return j.is_null() ? std::nan("") : j.get<double>();
}

} // namespace autoansatz
