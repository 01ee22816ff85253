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
 * Circuit template library: two feature embeddings (angle, IQP) and seven
 * variational families (s2d, qaoa, ttn, mps, strong, basic, random), with
 * exact parameter-count formulas that match the built circuits slot for
 * slot.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autoansatz/rng.hpp"
#include "autoansatz/statevector.hpp"

namespace autoansatz {

enum class EmbeddingKind : std::uint8_t { Angle, IQP };
enum class VariationalKind : std::uint8_t { S2D, QAOA, TTN, MPS, StronglyEntangling, BasicEntangler, Random };

constexpr int kNumEmbeddingKinds = 2;
constexpr int kNumVariationalKinds = 7;

/// Serialized names; these spellings appear in trial stores and CLI flags.
inline const char *embedding_name(EmbeddingKind k) {
    return k == EmbeddingKind::Angle ? "angle" : "iqp";
}

inline const char *variational_name(VariationalKind k) {
    switch (k) {
        case VariationalKind::S2D: return "s2d";
        case VariationalKind::QAOA: return "qaoa";
        case VariationalKind::TTN: return "ttn";
        case VariationalKind::MPS: return "mps";
        case VariationalKind::StronglyEntangling: return "strong";
        case VariationalKind::BasicEntangler: return "basic";
        case VariationalKind::Random: return "random";
    }
    return "?";
}

inline EmbeddingKind parse_embedding(std::string_view name) {
    if (name == "angle") return EmbeddingKind::Angle;
    if (name == "iqp") return EmbeddingKind::IQP;
    throw std::invalid_argument("unknown embedding kind: " + std::string(name));
}

inline VariationalKind parse_variational(std::string_view name) {
    for (int i = 0; i < kNumVariationalKinds; ++i) {
        const auto k = static_cast<VariationalKind>(i);
        if (name == variational_name(k)) return k;
    }
    throw std::invalid_argument("unknown variational kind: " + std::string(name));
}

/// Everything that determines a circuit template. structure_seed only
/// matters for the Random family, where it fixes the gate placement.
struct AnsatzSpec {
    EmbeddingKind embedding = EmbeddingKind::Angle;
    VariationalKind variational = VariationalKind::S2D;
    int num_qubits = 10;
    int num_layers = 1;
    std::uint64_t structure_seed = 0;
};

constexpr int kMinQubits = 2;
constexpr int kMaxLayers = 64;

inline void validate_spec(const AnsatzSpec &spec) {
    if (spec.num_qubits < kMinQubits || spec.num_qubits > kMaxQubits)
        throw std::invalid_argument("ansatz: qubit count out of supported range [" +
                                    std::to_string(kMinQubits) + ", " +
                                    std::to_string(kMaxQubits) + "]: " +
                                    std::to_string(spec.num_qubits));
    if (spec.num_layers < 1 || spec.num_layers > kMaxLayers)
        throw std::invalid_argument("ansatz: layer count out of supported range [1, " +
                                    std::to_string(kMaxLayers) + "]: " +
                                    std::to_string(spec.num_layers));
}

/// Trainable angles of one variational family at (n, L).
/// s2d, mps and ttn share 2(n-1) fresh angles per layer; qaoa has one ZZ
/// coupler per ring edge plus one RX per qubit (a single coupler when
/// n = 2, where a ring would duplicate the edge); strong has a 3-angle
/// general rotation per qubit; basic and random have one angle per qubit.
inline int count_params(VariationalKind kind, int n, int L) {
    if (n < kMinQubits || L < 1)
        throw std::invalid_argument("count_params: need n >= 2 and L >= 1");
    int per_layer = 0;
    switch (kind) {
        case VariationalKind::S2D:
        case VariationalKind::TTN:
        case VariationalKind::MPS: per_layer = 2 * (n - 1); break;
        case VariationalKind::QAOA: per_layer = (n >= 3 ? 2 * n : n + 1); break;
        case VariationalKind::StronglyEntangling: per_layer = 3 * n; break;
        case VariationalKind::BasicEntangler:
        case VariationalKind::Random: per_layer = n; break;
    }
    return per_layer * L;
}

/// Embedding slots: one RY angle per qubit for angle embedding; one RZ per
/// qubit plus one ZZ per unordered pair for IQP.
inline int embed_count(const AnsatzSpec &spec) {
    validate_spec(spec);
    const int n = spec.num_qubits;
    return spec.embedding == EmbeddingKind::Angle ? n : n + n * (n - 1) / 2;
}

/// Slot index of the IQP pair term (i, j), i < j. Pairs are laid out
/// lexicographically after the n single-qubit slots. The model module
/// relies on this layout when chaining products back to raw angles.
inline int iqp_pair_slot(int n, int i, int j) {
    if (i > j) std::swap(i, j);
    return n + i * n - i * (i + 1) / 2 + (j - i - 1);
}

namespace detail {

class CircuitBuilder {
  public:
    CircuitBuilder(int n, int embed_slots, int var_slots)
        : circuit_(n, embed_slots, var_slots) {}

    void gate(GateKind kind, int w0, int w1 = -1) { circuit_.add({kind, w0, w1, {}}); }

    void embed_gate(GateKind kind, int slot, int w0, int w1 = -1) {
        circuit_.add({kind, w0, w1, {SlotKind::Embedding, slot}});
    }

    void var_gate(GateKind kind, int w0, int w1 = -1) {
        circuit_.add({kind, w0, w1, {SlotKind::Variational, next_var_++}});
    }

    Circuit finish() && {
        if (next_var_ != circuit_.variational_slot_count())
            throw std::logic_error("ansatz builder: variational slot count mismatch");
        return std::move(circuit_);
    }

  private:
    Circuit circuit_;
    int next_var_ = 0;
};

inline void build_embedding(CircuitBuilder &b, const AnsatzSpec &spec) {
    const int n = spec.num_qubits;
    if (spec.embedding == EmbeddingKind::Angle) {
        for (int i = 0; i < n; ++i) b.embed_gate(GateKind::RY, i, i);
        return;
    }
    for (int i = 0; i < n; ++i) b.gate(GateKind::H, i);
    for (int i = 0; i < n; ++i) b.embed_gate(GateKind::RZ, i, i);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) b.embed_gate(GateKind::ZZ, iqp_pair_slot(n, i, j), i, j);
}

inline void build_s2d_layer(CircuitBuilder &b, int n) {
    for (int i = 0; i + 1 < n; i += 2) b.gate(GateKind::CZ, i, i + 1);
    for (int i = 0; i + 1 < n; i += 2) {
        b.var_gate(GateKind::RY, i);
        b.var_gate(GateKind::RY, i + 1);
    }
    for (int i = 1; i + 1 < n; i += 2) b.gate(GateKind::CZ, i, i + 1);
    for (int i = 1; i + 1 < n; i += 2) {
        b.var_gate(GateKind::RY, i);
        b.var_gate(GateKind::RY, i + 1);
    }
}

inline void build_qaoa_layer(CircuitBuilder &b, int n) {
    if (n == 2) {
        b.var_gate(GateKind::ZZ, 0, 1);
    } else {
        for (int i = 0; i < n; ++i) b.var_gate(GateKind::ZZ, i, (i + 1) % n);
    }
    for (int i = 0; i < n; ++i) b.var_gate(GateKind::RX, i);
}

inline void build_ttn_layer(CircuitBuilder &b, int n) {
    std::vector<int> active(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = i;
    while (active.size() >= 2) {
        std::vector<int> next;
        for (std::size_t i = 0; i + 1 < active.size(); i += 2) {
            const int upper = active[i];
            const int lower = active[i + 1];
            b.var_gate(GateKind::RY, upper);
            b.var_gate(GateKind::RY, lower);
            b.gate(GateKind::CNOT, upper, lower);
            next.push_back(upper);
        }
        if (active.size() % 2 == 1) next.push_back(active.back());
        active = std::move(next);
    }
}

inline void build_mps_layer(CircuitBuilder &b, int n) {
    for (int i = 0; i + 1 < n; ++i) {
        b.var_gate(GateKind::RY, i);
        b.var_gate(GateKind::RY, i + 1);
        b.gate(GateKind::CNOT, i, i + 1);
    }
}

inline void build_strong_layer(CircuitBuilder &b, int n, int layer) {
    for (int i = 0; i < n; ++i) {
        b.var_gate(GateKind::RZ, i);
        b.var_gate(GateKind::RY, i);
        b.var_gate(GateKind::RZ, i);
    }
    const int range = 1 + layer % (n - 1);
    for (int i = 0; i < n; ++i) b.gate(GateKind::CNOT, i, (i + range) % n);
}

inline void build_basic_layer(CircuitBuilder &b, int n) {
    for (int i = 0; i < n; ++i) b.var_gate(GateKind::RY, i);
    if (n == 2) {
        b.gate(GateKind::CNOT, 0, 1);
    } else {
        for (int i = 0; i < n; ++i) b.gate(GateKind::CNOT, i, (i + 1) % n);
    }
}

inline void build_random_layer(CircuitBuilder &b, int n, Rng &rng) {
    constexpr GateKind rotations[3] = {GateKind::RX, GateKind::RY, GateKind::RZ};
    int cnots_placed = 0;
    const int cnot_budget = n / 2;
    for (int k = 0; k < n; ++k) {
        const GateKind kind = rotations[rng.uniform_int(0, 2)];
        const int wire = rng.uniform_int(0, n - 1);
        b.var_gate(kind, wire);
        if (k % 2 == 1 && cnots_placed < cnot_budget) {
            const int control = rng.uniform_int(0, n - 1);
            int target = rng.uniform_int(0, n - 2);
            if (target >= control) ++target;
            b.gate(GateKind::CNOT, control, target);
            ++cnots_placed;
        }
    }
}

} // namespace detail

/// Builds the full circuit for a spec: embedding block first, then L
/// variational layers. The returned circuit references exactly
/// embed_count(spec) embedding slots and count_params(...) variational
/// slots, in emission order.
inline Circuit build_circuit(const AnsatzSpec &spec) {
    validate_spec(spec);
    const int n = spec.num_qubits;
    const int L = spec.num_layers;
    detail::CircuitBuilder b(n, embed_count(spec), count_params(spec.variational, n, L));
    detail::build_embedding(b, spec);
    Rng structure_rng(derive_seed(spec.structure_seed, 0x5a6d));
    for (int layer = 0; layer < L; ++layer) {
        switch (spec.variational) {
            case VariationalKind::S2D: detail::build_s2d_layer(b, n); break;
            case VariationalKind::QAOA: detail::build_qaoa_layer(b, n); break;
            case VariationalKind::TTN: detail::build_ttn_layer(b, n); break;
            case VariationalKind::MPS: detail::build_mps_layer(b, n); break;
            case VariationalKind::StronglyEntangling: detail::build_strong_layer(b, n, layer); break;
            case VariationalKind::BasicEntangler: detail::build_basic_layer(b, n); break;
            case VariationalKind::Random: detail::build_random_layer(b, n, structure_rng); break;
        }
    }
    return std::move(b).finish();
}

} // namespace autoansatz
