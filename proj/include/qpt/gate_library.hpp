// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qpt/gate.hpp"

namespace qpt {

using CMatrix = Eigen::MatrixXcd;

// Dense 2^n x 2^n embedding, built column by column from basis states.
CMatrix unitary_of(const GateInstance& gate, std::size_t num_qubits);
CMatrix unitary_of(const Circuit& circuit);

// max_ij |A_ij - B_ij|
double max_abs_diff(const CMatrix& a, const CMatrix& b);

// 1 - |Tr(A^dagger B)| / dim; zero iff equal up to global phase.
double phase_insensitive_distance(const CMatrix& a, const CMatrix& b);

// Same comparison restricted to input columns where every listed qubit
// is |0>; rows where those qubits end nonzero count as mismatch.
double phase_insensitive_distance_clean(const CMatrix& a, const CMatrix& b, std::size_t num_qubits,
                                        const std::vector<QubitId>& clean_qubits);

// Standard 2-qubit QFT (H, controlled-phase pi/2, H, swap) with q_a as the
// more significant bit; unitary is (1/2) i^{jk}.
Circuit build_qft_pair(QubitId q_a, QubitId q_b, std::size_t num_qubits = 2);

// Number-conserving Fourier block for one spin species:
// |01>,|10> -> (|01> +- |10>)/sqrt2, |11> -> -|11> (fermionic sign).
// Unlike the plain DFT this diagonalizes c1^dag c2 + h.c. per sector.
Circuit build_fermionic_fourier_pair(QubitId q_a, QubitId q_b, std::size_t num_qubits = 2);

// Where multi-controlled gates park partial ANDs. blocks[i] lists the
// control qubits folded into ancillas[i]; empty blocks means "pair up the
// controls in order". route_all sends even 1-2 control gates through the
// ancillas so that every core gate sits next to the target.
struct AncillaLayout {
  std::vector<QubitId> ancillas;
  std::vector<std::vector<QubitId>> blocks;
  bool route_all = false;
};

// Multi-controlled Ry lowered to X, Ry, CNOT and Toffoli. Open controls are
// conjugated with X. Ancillas start and end in |0>.
Circuit build_mcry(const std::vector<Control>& controls, QubitId target, double theta, std::size_t num_qubits,
                   const AncillaLayout& layout = {});

enum class SpecialRotation { kPair6_9, kPair5_10 };

// The two basis indices (0-based) a special rotation mixes.
std::array<BasisIndex, 2> special_rotation_pair(SpecialRotation which);

// Dense reference: identity except the 2x2 block on (lo, hi) which is
// [[cos a/2, -sin a/2], [sin a/2, cos a/2]].
CMatrix two_level_rotation(std::size_t dim, BasisIndex lo, BasisIndex hi, double alpha);

// Two-level rotation on four system qubits realized as a CNOT ladder from
// the first qubit, a 3-controlled Ry, and the ladder undone.
Circuit build_special_rotation(SpecialRotation which, double alpha, std::array<QubitId, 4> qubits = {0, 1, 2, 3},
                               std::size_t num_qubits = 4);

// Ladder CNOT(q[0] -> q[1..3]); self-inverse.
void append_pivot_ladder(Circuit& c, const std::array<QubitId, 4>& q);

// Controlled Ry as Ry(a/2), C^kX, Ry(-a/2), C^kX. The C^kX gates keep the
// control polarities; lowering handles them later.
void append_ry_via_mcx(Circuit& c, const std::vector<Control>& controls, QubitId target, double theta);

// Ry on the pivot qubit for one special pair, assuming the ladder is on.
void append_special_core(Circuit& c, SpecialRotation which, double alpha, const std::array<QubitId, 4>& q);

}  // namespace qpt
