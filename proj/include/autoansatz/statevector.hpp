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
 * Dense noiseless statevector simulator.
 *
 * Conventions:
 *  - Wire 0 is the most significant bit of the amplitude index, so for
 *    n = 2 the basis order is |00>, |01>, |10>, |11> with wire 0 first.
 *  - RY(t)|0> = cos(t/2)|0> + sin(t/2)|1>.
 *  - ZZ(t) = exp(-i t/2 Z (x) Z), applied as a diagonal.
 *
 * Gates are applied in place with stride arithmetic, O(2^n) per gate;
 * no full matrices are ever built here.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace autoansatz {

using Complex = std::complex<double>;

constexpr int kMaxQubits = 20;

/// Full complex amplitude vector of an n-qubit register.
struct StateVector {
    int num_qubits = 0;
    std::vector<Complex> amps;

    /// |0...0> on n qubits.
    static StateVector zero_state(int n) {
        if (n < 1 || n > kMaxQubits)
            throw std::invalid_argument("StateVector: qubit count must be in [1, " +
                                        std::to_string(kMaxQubits) + "], got " +
                                        std::to_string(n));
        StateVector s;
        s.num_qubits = n;
        s.amps.assign(std::size_t{1} << n, Complex{0.0, 0.0});
        s.amps[0] = Complex{1.0, 0.0};
        return s;
    }

    /// Reset to |0...0> without reallocating.
    void reset() {
        std::fill(amps.begin(), amps.end(), Complex{0.0, 0.0});
        amps[0] = Complex{1.0, 0.0};
    }

    std::size_t dim() const { return amps.size(); }

    double norm_sq() const {
        double total = 0.0;
        for (const auto &a : amps) total += std::norm(a);
        return total;
    }
};

enum class GateKind : std::uint8_t { RX, RY, RZ, H, CZ, CNOT, ZZ };

constexpr bool is_parameterized(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ || k == GateKind::ZZ;
}

constexpr bool is_two_qubit(GateKind k) {
    return k == GateKind::CZ || k == GateKind::CNOT || k == GateKind::ZZ;
}

inline const char *gate_name(GateKind k) {
    switch (k) {
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::H: return "H";
        case GateKind::CZ: return "CZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::ZZ: return "ZZ";
    }
    return "?";
}

/// Which slot table a gate's angle comes from.
enum class SlotKind : std::uint8_t { None, Embedding, Variational };

struct SlotRef {
    SlotKind kind = SlotKind::None;
    int index = -1;
};

/// One gate in a circuit. wire1 is -1 for single-qubit gates. For CNOT,
/// wire0 is the control and wire1 the target.
struct Gate {
    GateKind kind;
    int wire0 = 0;
    int wire1 = -1;
    SlotRef slot{};
};

/// Ordered gate list plus the two slot tables. A slot may be referenced by
/// any number of gates (including zero); shared slots are what make
/// product-form embeddings expressible.
class Circuit {
  public:
    Circuit(int num_qubits, int embedding_slots, int variational_slots)
        : num_qubits_(num_qubits), embedding_slots_(embedding_slots),
          variational_slots_(variational_slots) {
        if (num_qubits < 1 || num_qubits > kMaxQubits)
            throw std::invalid_argument("Circuit: qubit count out of range: " +
                                        std::to_string(num_qubits));
        if (embedding_slots < 0 || variational_slots < 0)
            throw std::invalid_argument("Circuit: negative slot count");
    }

    void add(Gate g) {
        validate_wires(g);
        if (is_parameterized(g.kind)) {
            if (g.slot.kind == SlotKind::None)
                throw std::invalid_argument(std::string("Circuit: ") + gate_name(g.kind) +
                                            " requires a parameter slot");
            const int limit = g.slot.kind == SlotKind::Embedding ? embedding_slots_
                                                                 : variational_slots_;
            if (g.slot.index < 0 || g.slot.index >= limit)
                throw std::invalid_argument("Circuit: slot index out of range");
        } else if (g.slot.kind != SlotKind::None) {
            throw std::invalid_argument(std::string("Circuit: ") + gate_name(g.kind) +
                                        " does not take a parameter slot");
        }
        gates_.push_back(g);
    }

    int num_qubits() const { return num_qubits_; }
    int embedding_slot_count() const { return embedding_slots_; }
    int variational_slot_count() const { return variational_slots_; }
    const std::vector<Gate> &gates() const { return gates_; }

  private:
    void validate_wires(const Gate &g) const {
        if (g.wire0 < 0 || g.wire0 >= num_qubits_)
            throw std::out_of_range("Circuit: wire out of range");
        if (is_two_qubit(g.kind)) {
            if (g.wire1 < 0 || g.wire1 >= num_qubits_)
                throw std::out_of_range("Circuit: wire out of range");
            if (g.wire1 == g.wire0)
                throw std::invalid_argument("Circuit: two-qubit gate needs distinct wires");
        } else if (g.wire1 != -1) {
            throw std::invalid_argument("Circuit: single-qubit gate got a second wire");
        }
    }

    int num_qubits_;
    int embedding_slots_;
    int variational_slots_;
    std::vector<Gate> gates_;
};

namespace detail {

/// Bit position of a wire within the amplitude index (wire 0 = MSB).
inline int wire_bit(int num_qubits, int wire) { return num_qubits - 1 - wire; }

inline void apply_2x2(Complex *a, std::size_t dim, std::size_t stride, Complex u00,
                      Complex u01, Complex u10, Complex u11) {
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = a[i];
            const Complex a1 = a[i + stride];
            a[i] = u00 * a0 + u01 * a1;
            a[i + stride] = u10 * a0 + u11 * a1;
        }
    }
}

inline void apply_rx(Complex *a, std::size_t dim, std::size_t stride, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = a[i];
            const Complex a1 = a[i + stride];
            a[i] = c * a0 + Complex{0.0, -s} * a1;
            a[i + stride] = Complex{0.0, -s} * a0 + c * a1;
        }
    }
}

inline void apply_ry(Complex *a, std::size_t dim, std::size_t stride, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = a[i];
            const Complex a1 = a[i + stride];
            a[i] = c * a0 - s * a1;
            a[i + stride] = s * a0 + c * a1;
        }
    }
}

inline void apply_rz(Complex *a, std::size_t dim, std::size_t stride, double angle) {
    const Complex p0 = std::polar(1.0, -angle / 2.0);
    const Complex p1 = std::polar(1.0, angle / 2.0);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            a[i] *= p0;
            a[i + stride] *= p1;
        }
    }
}

inline void apply_h(Complex *a, std::size_t dim, std::size_t stride) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = a[i];
            const Complex a1 = a[i + stride];
            a[i] = inv_sqrt2 * (a0 + a1);
            a[i + stride] = inv_sqrt2 * (a0 - a1);
        }
    }
}

/// Spreads a compact counter into an index with zero bits inserted at the
/// two mask positions; masks must be given in ascending order.
inline std::size_t insert_zero_bits(std::size_t i, std::size_t lo_mask, std::size_t hi_mask) {
    i = ((i & ~(lo_mask - 1)) << 1) | (i & (lo_mask - 1));
    i = ((i & ~(hi_mask - 1)) << 1) | (i & (hi_mask - 1));
    return i;
}

inline void apply_cz(Complex *a, std::size_t dim, std::size_t m0, std::size_t m1) {
    const std::size_t lo = std::min(m0, m1);
    const std::size_t hi = std::max(m0, m1);
    const std::size_t quarter = dim / 4;
    for (std::size_t i = 0; i < quarter; ++i) {
        const std::size_t idx = insert_zero_bits(i, lo, hi) | lo | hi;
        a[idx] = -a[idx];
    }
}

inline void apply_cnot(Complex *a, std::size_t dim, std::size_t control_mask,
                       std::size_t target_mask) {
    const std::size_t lo = std::min(control_mask, target_mask);
    const std::size_t hi = std::max(control_mask, target_mask);
    const std::size_t quarter = dim / 4;
    for (std::size_t i = 0; i < quarter; ++i) {
        const std::size_t idx = insert_zero_bits(i, lo, hi) | control_mask;
        std::swap(a[idx], a[idx | target_mask]);
    }
}

inline void apply_zz(Complex *a, std::size_t dim, std::size_t m0, std::size_t m1,
                     double angle) {
    const Complex phase[2] = {std::polar(1.0, -angle / 2.0), std::polar(1.0, angle / 2.0)};
    int b0 = 0, b1 = 0;
    for (std::size_t m = m0; m > 1; m >>= 1) ++b0;
    for (std::size_t m = m1; m > 1; m >>= 1) ++b1;
    for (std::size_t i = 0; i < dim; ++i) a[i] *= phase[((i >> b0) ^ (i >> b1)) & 1u];
}

/// Dispatch with a pre-resolved angle; wires must already be validated.
inline void apply_resolved(StateVector &state, const Gate &g, double angle) {
    const std::size_t dim = state.dim();
    Complex *a = state.amps.data();
    const int n = state.num_qubits;
    const std::size_t s0 = std::size_t{1} << wire_bit(n, g.wire0);
    switch (g.kind) {
        case GateKind::RX: apply_rx(a, dim, s0, angle); break;
        case GateKind::RY: apply_ry(a, dim, s0, angle); break;
        case GateKind::RZ: apply_rz(a, dim, s0, angle); break;
        case GateKind::H: apply_h(a, dim, s0); break;
        case GateKind::CZ:
            apply_cz(a, dim, s0, std::size_t{1} << wire_bit(n, g.wire1));
            break;
        case GateKind::CNOT:
            apply_cnot(a, dim, s0, std::size_t{1} << wire_bit(n, g.wire1));
            break;
        case GateKind::ZZ:
            apply_zz(a, dim, s0, std::size_t{1} << wire_bit(n, g.wire1), angle);
            break;
    }
}

/// Inverse of a gate: negated angle for rotations, self-inverse otherwise.
inline void apply_resolved_inverse(StateVector &state, const Gate &g, double angle) {
    apply_resolved(state, g, is_parameterized(g.kind) ? -angle : angle);
}

// --- fused handling of consecutive diagonal gates ------------------------
//
// RZ, CZ and ZZ are all diagonal, so a run of them multiplies each
// amplitude by exp(i * alpha_i) for a per-index angle that can be
// accumulated in one real vector and applied in a single pass. The IQP
// embedding emits O(n^2) consecutive diagonal gates, which makes this the
// difference between O(n^2) and O(1) state sweeps for that block.

inline bool is_diagonal_gate(GateKind k) {
    return k == GateKind::RZ || k == GateKind::CZ || k == GateKind::ZZ;
}

/// Fusing pays for parameterized diagonals (they cost a phase pass each);
/// plain CZ sign flips are cheaper left alone.
constexpr std::size_t kDiagFuseThreshold = 4;

inline bool worth_fusing(const std::vector<Gate> &gates, std::size_t begin, std::size_t end) {
    std::size_t parameterized = 0;
    for (std::size_t j = begin; j < end; ++j)
        if (is_parameterized(gates[j].kind)) ++parameterized;
    return parameterized >= kDiagFuseThreshold;
}

/// Adds the per-index phase angle of one diagonal gate (amp *= e^{i a}).
inline void add_diag_phase(double *alpha, std::size_t dim, int n, const Gate &g, double angle) {
    const std::size_t m0 = std::size_t{1} << wire_bit(n, g.wire0);
    switch (g.kind) {
        case GateKind::RZ: {
            const double h = angle / 2.0;
            for (std::size_t base = 0; base < dim; base += 2 * m0)
                for (std::size_t i = base; i < base + m0; ++i) {
                    alpha[i] -= h;
                    alpha[i + m0] += h;
                }
            break;
        }
        case GateKind::ZZ: {
            const double h = angle / 2.0;
            const int b0 = wire_bit(n, g.wire0);
            const int b1 = wire_bit(n, g.wire1);
            for (std::size_t i = 0; i < dim; ++i) {
                const double parity = static_cast<double>(((i >> b0) ^ (i >> b1)) & 1u);
                alpha[i] += h * (2.0 * parity - 1.0);
            }
            break;
        }
        case GateKind::CZ: {
            const std::size_t m1 = std::size_t{1} << wire_bit(n, g.wire1);
            const std::size_t lo = std::min(m0, m1);
            const std::size_t hi = std::max(m0, m1);
            constexpr double pi = 3.14159265358979323846;
            for (std::size_t i = 0; i < dim / 4; ++i)
                alpha[insert_zero_bits(i, lo, hi) | lo | hi] += pi;
            break;
        }
        default: throw std::logic_error("add_diag_phase: gate is not diagonal");
    }
}

/// amps[i] *= exp(i * sign * alpha[i])
inline void apply_phase_vector(Complex *a, const double *alpha, std::size_t dim, double sign) {
    for (std::size_t i = 0; i < dim; ++i) {
        const double t = sign * alpha[i];
        a[i] *= Complex{std::cos(t), std::sin(t)};
    }
}

inline std::vector<double> &diag_scratch(std::size_t dim) {
    static thread_local std::vector<double> alpha;
    alpha.assign(dim, 0.0);
    return alpha;
}

} // namespace detail

/// Applies a single gate in place. The angle must be present exactly when
/// the gate kind is parameterized.
inline void apply_gate(StateVector &state, const Gate &g,
                       std::optional<double> angle = std::nullopt) {
    const int n = state.num_qubits;
    if (g.wire0 < 0 || g.wire0 >= n)
        throw std::out_of_range("apply_gate: wire out of range");
    if (is_two_qubit(g.kind)) {
        if (g.wire1 < 0 || g.wire1 >= n)
            throw std::out_of_range("apply_gate: wire out of range");
        if (g.wire1 == g.wire0)
            throw std::invalid_argument("apply_gate: wires must be distinct");
    } else if (g.wire1 != -1) {
        throw std::invalid_argument("apply_gate: unexpected second wire");
    }
    if (is_parameterized(g.kind)) {
        if (!angle.has_value())
            throw std::invalid_argument(std::string("apply_gate: ") + gate_name(g.kind) +
                                        " needs an angle");
    } else if (angle.has_value()) {
        throw std::invalid_argument(std::string("apply_gate: ") + gate_name(g.kind) +
                                    " takes no angle");
    }
    detail::apply_resolved(state, g, angle.value_or(0.0));
}

/// <Z_wire> of the current state; always in [-1, 1] for a normalized state.
inline double expect_z(const StateVector &state, int wire) {
    if (wire < 0 || wire >= state.num_qubits)
        throw std::out_of_range("expect_z: wire out of range");
    const std::size_t mask = std::size_t{1} << detail::wire_bit(state.num_qubits, wire);
    double value = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const double p = std::norm(state.amps[i]);
        value += (i & mask) ? -p : p;
    }
    return value;
}

namespace detail {

inline double slot_value(const Gate &g, std::span<const double> variational,
                         std::span<const double> embedding) {
    switch (g.slot.kind) {
        case SlotKind::Variational: return variational[static_cast<std::size_t>(g.slot.index)];
        case SlotKind::Embedding: return embedding[static_cast<std::size_t>(g.slot.index)];
        case SlotKind::None: return 0.0;
    }
    return 0.0;
}

inline void check_slot_lengths(const Circuit &c, std::span<const double> variational,
                               std::span<const double> embedding) {
    if (static_cast<int>(variational.size()) != c.variational_slot_count() ||
        static_cast<int>(embedding.size()) != c.embedding_slot_count())
        throw std::invalid_argument(
            "run_circuit: slot-count mismatch (want " +
            std::to_string(c.variational_slot_count()) + " variational, " +
            std::to_string(c.embedding_slot_count()) + " embedding; got " +
            std::to_string(variational.size()) + ", " + std::to_string(embedding.size()) + ")");
}

/// Runs the circuit into a caller-owned state, optionally adding
/// `shift_delta` to the angle of the single gate at `shift_gate`.
/// The shift is per occurrence, which is what the two-term rule needs.
/// Long diagonal runs (away from the shifted gate) are applied fused.
inline void run_into(StateVector &state, const Circuit &c,
                     std::span<const double> variational, std::span<const double> embedding,
                     int shift_gate = -1, double shift_delta = 0.0) {
    state.reset();
    const auto &gates = c.gates();
    const std::size_t dim = state.dim();
    std::size_t k = 0;
    while (k < gates.size()) {
        std::size_t end = k;
        while (end < gates.size() && is_diagonal_gate(gates[end].kind) &&
               static_cast<int>(end) != shift_gate)
            ++end;
        if (end - k >= kDiagFuseThreshold && worth_fusing(gates, k, end)) {
            auto &alpha = diag_scratch(dim);
            for (std::size_t j = k; j < end; ++j)
                add_diag_phase(alpha.data(), dim, state.num_qubits, gates[j],
                               slot_value(gates[j], variational, embedding));
            apply_phase_vector(state.amps.data(), alpha.data(), dim, 1.0);
            k = end;
        } else {
            double angle = slot_value(gates[k], variational, embedding);
            if (static_cast<int>(k) == shift_gate) angle += shift_delta;
            apply_resolved(state, gates[k], angle);
            ++k;
        }
    }
}

/// All <Z_w> in one pass over the amplitudes.
inline std::vector<double> all_z(const StateVector &state) {
    const int n = state.num_qubits;
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const double p = std::norm(state.amps[i]);
        for (int w = 0; w < n; ++w)
            r[static_cast<std::size_t>(w)] += (i >> (n - 1 - w)) & 1u ? -p : p;
    }
    return r;
}

} // namespace detail

/// Binds the slot tables, runs all gates from |0...0>, and returns
/// (<Z_0>, ..., <Z_{n-1}>). Pure: same inputs, same outputs.
inline std::vector<double> run_circuit(const Circuit &c, std::span<const double> variational,
                                       std::span<const double> embedding) {
    detail::check_slot_lengths(c, variational, embedding);
    StateVector state = StateVector::zero_state(c.num_qubits());
    detail::run_into(state, c, variational, embedding);
    return detail::all_z(state);
}

/// run_circuit variant that also exposes the final state (used by tests
/// and by the adjoint differentiation path).
inline std::vector<double> run_circuit_state(const Circuit &c,
                                             std::span<const double> variational,
                                             std::span<const double> embedding,
                                             StateVector &state) {
    detail::check_slot_lengths(c, variational, embedding);
    if (state.num_qubits != c.num_qubits()) state = StateVector::zero_state(c.num_qubits());
    detail::run_into(state, c, variational, embedding);
    return detail::all_z(state);
}

} // namespace autoansatz
