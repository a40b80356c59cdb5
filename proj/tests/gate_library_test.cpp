// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/gate_library.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qpt/error.hpp"
#include "qpt/statevector.hpp"

namespace qpt {
namespace {

using std::numbers::pi;

CMatrix ry_matrix(double theta) {
  CMatrix m(2, 2);
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
  return m;
}

TEST(GateMatrices, Conventions) {
  const Matrix2 rz = matrix_of(GateKind::kRz, {0.4});
  EXPECT_NEAR(std::abs(rz[0] - std::exp(Complex(0, -0.2))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rz[3] - std::exp(Complex(0, 0.2))), 0.0, 1e-15);
  const Matrix2 ry = matrix_of(GateKind::kRy, {0.4});
  EXPECT_NEAR(ry[2].real(), std::sin(0.2), 1e-15);
  EXPECT_NEAR(ry[1].real(), -std::sin(0.2), 1e-15);
  const Matrix2 t = matrix_of(GateKind::kT, {});
  EXPECT_NEAR(std::arg(t[3]), pi / 4, 1e-15);
}

TEST(GateMatrices, InverseIsAdjoint) {
  const std::vector<GateInstance> gs{gates::h(0),       gates::single(GateKind::kS, 1), gates::single(GateKind::kT, 0),
                                     gates::ry(1, 0.7), gates::rz(0, -1.3),             gates::phase(1, 0.25),
                                     gates::cry(0, 1, 0.9), gates::cphase(1, 0, 1.7),   gates::swap(0, 1)};
  for (const auto& g : gs) {
    const CMatrix u = unitary_of(g, 2);
    EXPECT_LT(max_abs_diff(u * unitary_of(g.inverse(), 2), CMatrix::Identity(4, 4)), 1e-14) << gate_name(g.kind);
  }
}

TEST(GateMatrices, CircuitUnitaryComposesInTimeOrder) {
  Circuit c(2);
  c.add(gates::h(0));
  c.add(gates::cnot(0, 1));
  const CMatrix u = unitary_of(c);
  // Bell state from |00>
  EXPECT_NEAR(u(0, 0).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(u(3, 0).real(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(u(1, 0)), 0.0, 1e-15);
}

TEST(Distances, PhaseInsensitive) {
  const CMatrix u = unitary_of(gates::cry(0, 1, 0.3), 2);
  EXPECT_NEAR(phase_insensitive_distance(u, Complex(0, 1) * u), 0.0, 1e-14);
  EXPECT_GT(phase_insensitive_distance(u, CMatrix::Identity(4, 4)), 1e-4);
  EXPECT_GT(max_abs_diff(u, Complex(0, 1) * u), 1.0);
}

TEST(Fourier, QftPairIsTwoQubitDft) {
  const CMatrix u = unitary_of(build_qft_pair(0, 1));
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      const Complex want = 0.5 * std::pow(Complex(0, 1), j * k);
      EXPECT_NEAR(std::abs(u(j, k) - want), 0.0, 1e-14) << j << "," << k;
    }
  }
}

TEST(Fourier, FermionicPairDiagonalizesHopping) {
  // -(a0^dag a1 + h.c.) on two Jordan-Wigner modes: couples |01> and |10>.
  CMatrix hop = CMatrix::Zero(4, 4);
  hop(1, 2) = hop(2, 1) = -1.0;
  const CMatrix u = unitary_of(build_fermionic_fourier_pair(0, 1));
  const CMatrix d = u.adjoint() * hop * u;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) EXPECT_NEAR(std::abs(d(i, j)), 0.0, 1e-14);
    }
  }
  // vacuum and doubly occupied states are left alone up to sign
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(u(3, 3)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(d(1, 1).real() + d(2, 2).real()), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(d(1, 1).real() - d(2, 2).real()), 2.0, 1e-14);
}

TEST(Fourier, RejectsSameQubit) {
  EXPECT_THROW(build_qft_pair(1, 1, 2), Error);
  EXPECT_THROW(build_fermionic_fourier_pair(0, 0, 2), Error);
}

// Checks an expanded multi-controlled Ry against the ideal gate on every basis
// input whose ancillas start in |0>, and that the ancillas return to |0>.
void expect_mcry_exact(const std::vector<Control>& controls, QubitId target, double theta, std::size_t n,
                       const AncillaLayout& layout) {
  const Circuit c = build_mcry(controls, target, theta, n, layout);
  for (const auto& g : c.gates()) {
    EXPECT_LE(g.controls.size(), 2u);
    if (g.kind == GateKind::kRy) {
      EXPECT_TRUE(g.controls.empty());
    }
  }
  BasisIndex anc_mask = 0;
  for (QubitId a : layout.ancillas) anc_mask |= BasisIndex{1} << (n - 1 - a);
  for (BasisIndex in = 0; in < (BasisIndex{1} << n); ++in) {
    if (in & anc_mask) continue;
    StateVector got = StateVector::basis(n, in), want = StateVector::basis(n, in);
    apply_circuit(got, c);
    apply_gate(want, gates::mcry(controls, target, theta));
    for (BasisIndex i = 0; i < got.dimension(); ++i) ASSERT_NEAR(std::abs(got[i] - want[i]), 0.0, 1e-13) << in;
  }
}

TEST(MultiControlledRy, SmallControlCountsNeedNoAncilla) {
  expect_mcry_exact({{0, true}}, 1, 0.8, 2, {});
  expect_mcry_exact({{0, false}}, 1, -1.3, 2, {});
  expect_mcry_exact({{0, true}, {2, false}}, 1, 2.1, 3, {});
}

TEST(MultiControlledRy, ThreeAndFourControlsWithAncillas) {
  expect_mcry_exact({{0, true}, {1, true}, {2, true}}, 3, 0.9, 5, {{4}, {}, false});
  expect_mcry_exact({{0, true}, {1, false}, {2, true}, {3, false}}, 6, 1.7, 7, {{4, 5}, {}, false});
  expect_mcry_exact({{3, false}, {0, true}, {2, true}, {1, true}}, 6, -0.6, 7, {{4, 5}, {}, false});
}

TEST(MultiControlledRy, BlockRoutingEveryControlSubset) {
  const AncillaLayout layout{{4, 5}, {{0, 1}, {2, 3}}, true};
  for (BasisIndex subset = 1; subset < 16; ++subset) {
    for (BasisIndex polarity = 0; polarity < 16; polarity += 5) {
      std::vector<Control> ctl;
      for (QubitId q = 0; q < 4; ++q) {
        if (subset & (BasisIndex{1} << q)) ctl.push_back({q, ((polarity >> q) & 1u) != 0});
      }
      expect_mcry_exact(ctl, 6, 0.37 + static_cast<double>(subset), 7, layout);
    }
  }
}

TEST(MultiControlledRy, Errors) {
  try {
    build_mcry({{0, true}, {1, true}, {2, true}}, 3, 0.5, 4, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientAncilla);
  }
  EXPECT_THROW(build_mcry({}, 0, 0.5, 2), Error);
  EXPECT_THROW(build_mcry({{0, true}}, 0, 0.5, 2), Error);
  EXPECT_THROW(build_mcry({{0, true}}, 1, 0.5, 3, {{1}, {}, false}), Error);
}

TEST(SpecialRotation, MatchesTwoLevelRotation) {
  for (auto which : {SpecialRotation::kPair6_9, SpecialRotation::kPair5_10}) {
    const auto [lo, hi] = special_rotation_pair(which);
    for (double alpha : {0.3, pi / 2, -2.2, pi}) {
      const CMatrix u = unitary_of(build_special_rotation(which, alpha));
      EXPECT_LT(max_abs_diff(u, two_level_rotation(16, lo, hi, alpha)), 1e-13) << lo << " " << alpha;
    }
  }
}

TEST(SpecialRotation, PairsAndQuarterTurnEntries) {
  EXPECT_EQ(special_rotation_pair(SpecialRotation::kPair6_9), (std::array<BasisIndex, 2>{6, 9}));
  EXPECT_EQ(special_rotation_pair(SpecialRotation::kPair5_10), (std::array<BasisIndex, 2>{5, 10}));
  const CMatrix u = unitary_of(build_special_rotation(SpecialRotation::kPair6_9, pi / 4));
  EXPECT_NEAR(u(6, 6).real(), std::cos(pi / 8), 1e-14);
  EXPECT_NEAR(u(9, 9).real(), std::cos(pi / 8), 1e-14);
  EXPECT_NEAR(u(9, 6).real(), std::sin(pi / 8), 1e-14);
  EXPECT_NEAR(u(6, 9).real(), -std::sin(pi / 8), 1e-14);
}

TEST(SpecialRotation, RelabeledQubits) {
  const std::array<QubitId, 4> q{2, 0, 3, 1};
  const CMatrix u = unitary_of(build_special_rotation(SpecialRotation::kPair5_10, 0.9, q, 4));
  // labels are read on q in order; map them to physical indices
  auto phys = [&](BasisIndex label) {
    BasisIndex p = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (label & (BasisIndex{1} << (3 - i))) p |= BasisIndex{1} << (3 - q[i]);
    }
    return static_cast<Eigen::Index>(p);
  };
  EXPECT_NEAR(u(phys(5), phys(5)).real(), std::cos(0.45), 1e-14);
  EXPECT_NEAR(u(phys(10), phys(5)).real(), std::sin(0.45), 1e-14);
  EXPECT_NEAR(std::abs(u(phys(3), phys(3))), 1.0, 1e-14);
}

TEST(RyViaMcx, HalfAngleIdentity) {
  Circuit c(3);
  append_ry_via_mcx(c, {{0, true}, {1, true}}, 2, 1.1);
  const CMatrix u = unitary_of(c);
  const CMatrix r = ry_matrix(1.1);
  EXPECT_NEAR(std::abs(u(6, 6) - r(0, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(7, 6) - r(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(u(0, 0) - 1.0), 0.0, 1e-14);
}

}  // namespace
}  // namespace qpt
