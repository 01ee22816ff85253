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
// Test-only dense-matrix simulator. Builds an explicit 2^n x 2^n matrix
// for every gate (Kronecker embedding by index bookkeeping) and applies
// it by full matrix-vector products. Deliberately shares no code with the
// stride kernels it is used to check.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "autoansatz/statevector.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Matrix = std::vector<std::vector<Complex>>; // row-major dense

inline Matrix identity(std::size_t dim) {
    Matrix m(dim, std::vector<Complex>(dim, Complex{0, 0}));
    for (std::size_t i = 0; i < dim; ++i) m[i][i] = Complex{1, 0};
    return m;
}

// 2x2 and 4x4 gate definitions written out from scratch.
inline Matrix gate_matrix_1q(autoansatz::GateKind kind, double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    const Complex I{0, 1};
    switch (kind) {
        case autoansatz::GateKind::RX: return {{c, -I * s}, {-I * s, c}};
        case autoansatz::GateKind::RY: return {{c, -s}, {s, c}};
        case autoansatz::GateKind::RZ:
            return {{std::exp(-I * (t / 2)), 0}, {0, std::exp(I * (t / 2))}};
        case autoansatz::GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            return {{r, r}, {r, -r}};
        }
        default: throw std::logic_error("not a 1q gate");
    }
}

inline Matrix gate_matrix_2q(autoansatz::GateKind kind, double t) {
    const Complex I{0, 1};
    Matrix m = identity(4);
    switch (kind) {
        case autoansatz::GateKind::CZ: m[3][3] = Complex{-1, 0}; return m;
        case autoansatz::GateKind::CNOT:
            // basis order |c t>: |10> <-> |11>
            m[2][2] = m[3][3] = Complex{0, 0};
            m[2][3] = m[3][2] = Complex{1, 0};
            return m;
        case autoansatz::GateKind::ZZ:
            m[0][0] = m[3][3] = std::exp(-I * (t / 2));
            m[1][1] = m[2][2] = std::exp(I * (t / 2));
            return m;
        default: throw std::logic_error("not a 2q gate");
    }
}

// Embeds a small gate matrix acting on the listed wires into the full
// 2^n space. Wire 0 is the most significant index bit; within the small
// matrix, wires[0] is the most significant sub-index bit.
inline Matrix embed(const Matrix &small, const std::vector<int> &wires, int n) {
    const std::size_t dim = std::size_t{1} << n;
    Matrix full(dim, std::vector<Complex>(dim, Complex{0, 0}));
    const int m = static_cast<int>(wires.size());
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t sub_col = 0;
        for (int q = 0; q < m; ++q) {
            const std::size_t bit = (col >> (n - 1 - wires[q])) & 1u;
            sub_col = (sub_col << 1) | bit;
        }
        for (std::size_t sub_row = 0; sub_row < (std::size_t{1} << m); ++sub_row) {
            const Complex v = small[sub_row][sub_col];
            if (v == Complex{0, 0}) continue;
            std::size_t row = col;
            for (int q = 0; q < m; ++q) {
                const std::size_t bit = (sub_row >> (m - 1 - q)) & 1u;
                const std::size_t mask = std::size_t{1} << (n - 1 - wires[q]);
                row = bit ? (row | mask) : (row & ~mask);
            }
            full[row][col] += v;
        }
    }
    return full;
}

inline std::vector<Complex> mat_vec(const Matrix &m, const std::vector<Complex> &v) {
    std::vector<Complex> out(v.size(), Complex{0, 0});
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

// Runs a circuit by dense matrix products from |0...0>, binding slot
// values the same way run_circuit does.
inline std::vector<Complex> run_dense(const autoansatz::Circuit &circuit,
                                      const std::vector<double> &variational,
                                      const std::vector<double> &embedding) {
    const int n = circuit.num_qubits();
    std::vector<Complex> state(std::size_t{1} << n, Complex{0, 0});
    state[0] = Complex{1, 0};
    for (const auto &g : circuit.gates()) {
        double angle = 0.0;
        if (g.slot.kind == autoansatz::SlotKind::Variational)
            angle = variational[static_cast<std::size_t>(g.slot.index)];
        else if (g.slot.kind == autoansatz::SlotKind::Embedding)
            angle = embedding[static_cast<std::size_t>(g.slot.index)];
        Matrix full;
        if (autoansatz::is_two_qubit(g.kind))
            full = embed(gate_matrix_2q(g.kind, angle), {g.wire0, g.wire1}, n);
        else
            full = embed(gate_matrix_1q(g.kind, angle), {g.wire0}, n);
        state = mat_vec(full, state);
    }
    return state;
}

inline double z_expectation(const std::vector<Complex> &state, int wire, int n) {
    double v = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double p = std::norm(state[i]);
        v += ((i >> (n - 1 - wire)) & 1u) ? -p : p;
    }
    return v;
}

} // namespace oracle
