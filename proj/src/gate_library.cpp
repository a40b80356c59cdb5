// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/gate_library.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpt/error.hpp"
#include "qpt/statevector.hpp"

namespace qpt {

namespace {

template <class Apply>
CMatrix columns_of(std::size_t num_qubits, Apply&& apply) {
  const std::size_t dim = std::size_t{1} << num_qubits;
  CMatrix u(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector s = StateVector::basis(num_qubits, col);
    apply(s);
    for (std::size_t row = 0; row < dim; ++row) u(row, col) = s[row];
  }
  return u;
}

}  // namespace

CMatrix unitary_of(const GateInstance& gate, std::size_t num_qubits) {
  gate.validate(num_qubits);
  return columns_of(num_qubits, [&](StateVector& s) { apply_gate(s, gate); });
}

CMatrix unitary_of(const Circuit& circuit) {
  return columns_of(circuit.num_qubits(), [&](StateVector& s) { apply_circuit(s, circuit); });
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

double phase_insensitive_distance(const CMatrix& a, const CMatrix& b) {
  return 1.0 - std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

double phase_insensitive_distance_clean(const CMatrix& a, const CMatrix& b, std::size_t num_qubits,
                                        const std::vector<QubitId>& clean_qubits) {
  std::size_t mask = 0;
  for (QubitId q : clean_qubits) mask |= std::size_t{1} << (num_qubits - 1 - q);
  Complex overlap = 0.0;
  std::size_t cols = 0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    if (static_cast<std::size_t>(c) & mask) continue;
    overlap += a.col(c).dot(b.col(c));
    ++cols;
  }
  return 1.0 - std::abs(overlap) / static_cast<double>(cols);
}

Circuit build_qft_pair(QubitId q_a, QubitId q_b, std::size_t num_qubits) {
  if (q_a == q_b) throw Error(ErrorCode::kIndexCollision, "QFT pair needs two distinct qubits");
  Circuit c(num_qubits);
  c.add(gates::h(q_a));
  c.add(gates::cphase(q_b, q_a, std::numbers::pi / 2));
  c.add(gates::h(q_b));
  c.add(gates::swap(q_a, q_b));
  return c;
}

Circuit build_fermionic_fourier_pair(QubitId q_a, QubitId q_b, std::size_t num_qubits) {
  if (q_a == q_b) throw Error(ErrorCode::kIndexCollision, "Fourier pair needs two distinct qubits");
  Circuit c(num_qubits);
  c.add(gates::cnot(q_b, q_a));
  c.add(gates::cry(q_a, q_b, std::numbers::pi / 2));
  c.add(gates::cnot(q_b, q_a));
  c.add(gates::z(q_a));
  return c;
}

namespace {

void append_core(Circuit& c, const std::vector<QubitId>& ctl, QubitId target, double theta,
                 std::vector<QubitId> spare);

void append_positive_mcry(Circuit& c, const std::vector<QubitId>& ctl, QubitId target, double theta,
                          const AncillaLayout& layout) {
  if (!layout.route_all && ctl.size() <= 2) {
    append_core(c, ctl, target, theta, layout.ancillas);
    return;
  }

  // Partition controls into AND groups, one per ancilla.
  std::vector<std::vector<QubitId>> groups;
  if (!layout.blocks.empty()) {
    groups.resize(layout.blocks.size());
    for (QubitId q : ctl) {
      bool placed = false;
      for (std::size_t b = 0; b < layout.blocks.size() && !placed; ++b) {
        if (std::find(layout.blocks[b].begin(), layout.blocks[b].end(), q) != layout.blocks[b].end()) {
          groups[b].push_back(q);
          placed = true;
        }
      }
      if (!placed) throw Error(ErrorCode::kInvalidArgument, "control qubit outside every ancilla block");
    }
  } else {
    for (std::size_t i = 0; i < ctl.size(); i += 2) {
      groups.push_back({ctl.begin() + static_cast<std::ptrdiff_t>(i),
                        ctl.begin() + static_cast<std::ptrdiff_t>(std::min(i + 2, ctl.size()))});
    }
  }
  // Outside block routing a lone control feeds the core directly.
  std::vector<QubitId> direct;
  if (!layout.route_all) {
    std::erase_if(groups, [&](const std::vector<QubitId>& g) {
      if (g.size() != 1) return false;
      direct.push_back(g[0]);
      return true;
    });
  }
  if (groups.size() > layout.ancillas.size()) {
    throw Error(ErrorCode::kInsufficientAncilla, std::to_string(ctl.size()) + " controls need " +
                                                     std::to_string(groups.size()) + " ancillas, have " +
                                                     std::to_string(layout.ancillas.size()));
  }

  Circuit compute(c.num_qubits());
  std::vector<QubitId> used = direct;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    if (grp.empty()) continue;
    if (grp.size() > 2) {
      throw Error(ErrorCode::kInsufficientAncilla, "an ancilla block holds more than two controls");
    }
    const QubitId anc = layout.ancillas[g];
    compute.add(grp.size() == 2 ? gates::toffoli(grp[0], grp[1], anc) : gates::cnot(grp[0], anc));
    used.push_back(anc);
  }
  std::vector<QubitId> spare;
  for (std::size_t a = groups.size(); a < layout.ancillas.size(); ++a) spare.push_back(layout.ancillas[a]);

  c.append(compute);
  append_core(c, used, target, theta, spare);
  c.append(compute.inverse());
}

void append_core(Circuit& c, const std::vector<QubitId>& ctl, QubitId target, double theta,
                 std::vector<QubitId> spare) {
  if (ctl.size() == 1) {
    c.add(gates::ry(target, theta / 2));
    c.add(gates::cnot(ctl[0], target));
    c.add(gates::ry(target, -theta / 2));
    c.add(gates::cnot(ctl[0], target));
  } else if (ctl.size() == 2) {
    c.add(gates::ry(target, theta / 2));
    c.add(gates::toffoli(ctl[0], ctl[1], target));
    c.add(gates::ry(target, -theta / 2));
    c.add(gates::toffoli(ctl[0], ctl[1], target));
  } else {
    AncillaLayout inner;
    inner.ancillas = std::move(spare);
    append_positive_mcry(c, ctl, target, theta, inner);
  }
}

}  // namespace

Circuit build_mcry(const std::vector<Control>& controls, QubitId target, double theta, std::size_t num_qubits,
                   const AncillaLayout& layout) {
  if (controls.empty()) throw Error(ErrorCode::kInvalidArgument, "build_mcry needs at least one control");
  // Validate the abstract gate (distinct, in range) before expanding.
  gates::mcry(controls, target, theta).validate(num_qubits);
  for (QubitId a : layout.ancillas) {
    if (a >= num_qubits) throw Error(ErrorCode::kInvalidQubit, "ancilla outside register");
    if (a == target) throw Error(ErrorCode::kIndexCollision, "ancilla equals target");
    for (const auto& ctl : controls) {
      if (ctl.qubit == a) throw Error(ErrorCode::kIndexCollision, "ancilla equals a control");
    }
  }

  Circuit c(num_qubits);
  Circuit flips(num_qubits);
  std::vector<QubitId> ctl;
  for (const auto& k : controls) {
    if (!k.on_one) flips.add(gates::x(k.qubit));
    ctl.push_back(k.qubit);
  }
  c.append(flips);
  append_positive_mcry(c, ctl, target, theta, layout);
  c.append(flips);
  return c;
}

std::array<BasisIndex, 2> special_rotation_pair(SpecialRotation which) {
  return which == SpecialRotation::kPair6_9 ? std::array<BasisIndex, 2>{6, 9} : std::array<BasisIndex, 2>{5, 10};
}

CMatrix two_level_rotation(std::size_t dim, BasisIndex lo, BasisIndex hi, double alpha) {
  CMatrix m = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const double c = std::cos(alpha / 2), s = std::sin(alpha / 2);
  const auto l = static_cast<Eigen::Index>(lo), h = static_cast<Eigen::Index>(hi);
  m(l, l) = c;
  m(h, h) = c;
  m(l, h) = -s;
  m(h, l) = s;
  return m;
}

void append_pivot_ladder(Circuit& c, const std::array<QubitId, 4>& q) {
  for (std::size_t i = 1; i < 4; ++i) c.add(gates::cnot(q[0], q[i]));
}

void append_ry_via_mcx(Circuit& c, const std::vector<Control>& controls, QubitId target, double theta) {
  c.add(gates::ry(target, theta / 2));
  c.add(gates::mcx(controls, target));
  c.add(gates::ry(target, -theta / 2));
  c.add(gates::mcx(controls, target));
}

void append_special_core(Circuit& c, SpecialRotation which, double alpha, const std::array<QubitId, 4>& q) {
  // After the ladder, the high member of each pair has its low three bits
  // flipped; the pair then differs only in the pivot bit.
  const auto [lo, hi] = special_rotation_pair(which);
  (void)hi;
  std::vector<Control> ctl;
  for (std::size_t i = 1; i < 4; ++i) ctl.push_back({q[i], ((lo >> (3 - i)) & 1u) != 0});
  append_ry_via_mcx(c, ctl, q[0], alpha);
}

Circuit build_special_rotation(SpecialRotation which, double alpha, std::array<QubitId, 4> qubits,
                               std::size_t num_qubits) {
  Circuit c(num_qubits);
  append_pivot_ladder(c, qubits);
  append_special_core(c, which, alpha, qubits);
  append_pivot_ladder(c, qubits);
  return c;
}

}  // namespace qpt
