// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/statevector.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qpt/error.hpp"

namespace qpt {
namespace {

// Brute-force action of a controlled 1-qubit matrix: loop over every basis
// index and build the output column by column.
std::vector<Complex> expanded_apply(const std::vector<Complex>& in, std::size_t n, const Matrix2& m, QubitId target,
                                    const std::vector<Control>& controls) {
  const std::size_t dim = std::size_t{1} << n;
  auto bit = [n](BasisIndex i, QubitId q) { return (i >> (n - 1 - q)) & 1u; };
  std::vector<Complex> out(dim, 0.0);
  for (BasisIndex col = 0; col < dim; ++col) {
    bool active = true;
    for (const auto& c : controls) active = active && (bit(col, c.qubit) == (c.on_one ? 1u : 0u));
    if (!active) {
      out[col] += in[col];
      continue;
    }
    const BasisIndex b = bit(col, target);
    const BasisIndex flipped = col ^ (BasisIndex{1} << (n - 1 - target));
    // Row b of the output gets m[b][b] from col, the other row gets m[1-b][b].
    out[col] += m[b * 2 + b] * in[col];
    out[flipped] += m[(1 - b) * 2 + b] * in[col];
  }
  return out;
}

std::vector<Complex> random_state(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Complex> v(std::size_t{1} << n);
  double nrm = 0.0;
  for (auto& a : v) {
    a = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    nrm += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(nrm);
  return v;
}

TEST(StateVector, ZeroStateAndSizeLimits) {
  StateVector s(3);
  EXPECT_EQ(s.dimension(), 8u);
  EXPECT_EQ(s[0], Complex(1.0));
  EXPECT_DOUBLE_EQ(s.norm(), 1.0);
  EXPECT_THROW(StateVector(0), Error);
  EXPECT_THROW(StateVector(25), Error);
  EXPECT_NO_THROW(StateVector(20));
}

TEST(StateVector, FirstQubitIsMostSignificant) {
  StateVector s(3);
  apply_gate(s, gates::x(0));
  EXPECT_EQ(s[4], Complex(1.0));
  apply_gate(s, gates::x(2));
  EXPECT_EQ(s[5], Complex(1.0));
  EXPECT_EQ(bitstring(5, 3), "101");
}

TEST(StateVector, AmplitudeOutOfRangeThrows) {
  StateVector s(2);
  EXPECT_THROW(amplitude(s, 4), Error);
  EXPECT_EQ(amplitude(s, 0), Complex(1.0));
}

TEST(StateVector, ErrorCodes) {
  StateVector s(2);
  try {
    apply_gate(s, gates::cnot(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexCollision);
  }
  try {
    apply_gate(s, gates::x(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidQubit);
  }
  try {
    apply_matrix(s, Matrix2{2.0, 0.0, 0.0, 1.0}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonUnitary);
  }
  try {
    postselect(s, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroNormBranch);
  }
}

TEST(StateVector, ControlledGatesMatchExpandedMatrix) {
  const double theta = 0.731;
  const std::vector<GateKind> kinds{GateKind::kX, GateKind::kY, GateKind::kZ, GateKind::kH, GateKind::kS,
                                    GateKind::kT, GateKind::kRy, GateKind::kRz, GateKind::kPhase};
  std::uint64_t seed = 1;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (GateKind k : kinds) {
      const bool param = k == GateKind::kRy || k == GateKind::kRz || k == GateKind::kPhase;
      const std::vector<double> params = param ? std::vector<double>{theta} : std::vector<double>{};
      const Matrix2 m = matrix_of(k, params);
      for (QubitId t = 0; t < n; ++t) {
        // every subset of the other qubits as controls, with alternating polarity
        for (BasisIndex subset = 0; subset < (BasisIndex{1} << n); ++subset) {
          if (subset & (BasisIndex{1} << t)) continue;
          std::vector<Control> controls;
          for (QubitId q = 0; q < n; ++q) {
            if (subset & (BasisIndex{1} << q)) controls.push_back({q, (q + subset) % 2 == 0});
          }
          const auto in = random_state(n, seed++);
          StateVector s = StateVector::from_amplitudes(n, in);
          apply_gate(s, GateInstance{k, params, {t}, controls});
          const auto want = expanded_apply(in, n, m, t, controls);
          for (BasisIndex i = 0; i < s.dimension(); ++i) ASSERT_NEAR(std::abs(s[i] - want[i]), 0.0, 1e-12);
        }
      }
    }
  }
}

TEST(StateVector, SwapExchangesQubits) {
  const auto in = random_state(3, 99);
  StateVector s = StateVector::from_amplitudes(3, in);
  apply_gate(s, gates::swap(0, 2));
  for (BasisIndex i = 0; i < 8; ++i) {
    const BasisIndex j = (i & 2) | ((i >> 2) & 1) | ((i & 1) << 2);
    EXPECT_NEAR(std::abs(s[j] - in[i]), 0.0, 1e-14);
  }
}

TEST(StateVector, UnitaryCircuitsPreserveNorm) {
  Circuit c(5);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const QubitId a = rng() % 5, b = (a + 1 + rng() % 4) % 5;
    switch (rng() % 4) {
      case 0: c.add(gates::h(a)); break;
      case 1: c.add(gates::ry(a, uniform01(rng) * 6.0)); break;
      case 2: c.add(gates::cnot(a, b)); break;
      default: c.add(gates::cphase(a, b, uniform01(rng))); break;
    }
  }
  StateVector s(5);
  apply_circuit(s, c);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  apply_circuit(s, c.inverse());
  EXPECT_NEAR(std::abs(s[0]), 1.0, 1e-12);
}

TEST(StateVector, MeasurementProbabilityIsRyHalfAngle) {
  for (double theta : {0.0, 0.3, 1.1, 2.0, 3.0}) {
    StateVector s(2);
    apply_gate(s, gates::ry(1, theta));
    const double p1 = std::sin(theta / 2) * std::sin(theta / 2);
    EXPECT_NEAR(probability_of(s, 1, 1), p1, 1e-14);
    EXPECT_NEAR(probability_of(s, 1, 0) + probability_of(s, 1, 1), 1.0, 1e-14);
  }
}

TEST(StateVector, MeasureCollapsesAndIsSeeded) {
  StateVector s(2);
  apply_gate(s, gates::h(0));
  apply_gate(s, gates::cnot(0, 1));
  const auto a = measure_qubit(s, 0, 42);
  const auto b = measure_qubit(s, 0, 42);
  EXPECT_EQ(a.outcome, b.outcome);
  const BasisIndex kept = a.outcome ? 3 : 0;
  EXPECT_NEAR(std::abs(a.collapsed[kept]), 1.0, 1e-14);
  EXPECT_NEAR(probability_of(a.collapsed, 1, a.outcome), 1.0, 1e-14);
  // the input is untouched
  EXPECT_NEAR(std::norm(s[0]), 0.5, 1e-14);
}

TEST(StateVector, SampleCountsWithinThreeSigma) {
  StateVector s(3);
  apply_gate(s, gates::ry(0, 1.2));
  apply_gate(s, gates::h(2));
  const std::vector<QubitId> qs{0, 2};
  const auto probs = marginal_probabilities(s, qs);
  const std::size_t shots = 20000;
  const auto counts = sample_counts(s, qs, shots, 5);
  std::size_t total = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto it = counts.find(bitstring(i, 2));
    const double got = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    const double mean = probs[i] * shots;
    const double sigma = std::sqrt(shots * probs[i] * (1 - probs[i]));
    EXPECT_LE(std::abs(got - mean), 3 * sigma + 1e-9) << bitstring(i, 2);
    total += it == counts.end() ? 0 : it->second;
  }
  EXPECT_EQ(total, shots);
  EXPECT_EQ(counts, sample_counts(s, qs, shots, 5));
}

TEST(StateVector, MarginalOrderFollowsArgumentOrder) {
  StateVector s(3);
  apply_gate(s, gates::x(2));
  const std::vector<QubitId> fwd{0, 2}, rev{2, 0};
  EXPECT_DOUBLE_EQ(marginal_probabilities(s, fwd)[1], 1.0);
  EXPECT_DOUBLE_EQ(marginal_probabilities(s, rev)[2], 1.0);
}

TEST(Noise, ZeroNoiseIsIdeal) {
  StateVector a(2), b(2);
  Rng rng(1);
  for (const auto& g : {gates::h(0), gates::cnot(0, 1), gates::ry(1, 0.4)}) {
    apply_gate(a, g);
    apply_noisy_gate(b, g, NoiseParams::none(), rng);
  }
  for (BasisIndex i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Noise, FullDepolarizingAlwaysInsertsPauli) {
  const NoiseParams always{1.0, 1.0, 0.0};
  int changed = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = apply_noisy_gate(StateVector(1), gates::single(GateKind::kI, 0), always, seed);
    // X or Y flips |0>, Z only adds a phase
    if (std::abs(out[1]) > 0.5) ++changed;
    EXPECT_NEAR(out.norm(), 1.0, 1e-14);
  }
  EXPECT_GT(changed, 20);
  EXPECT_LT(changed, 50);
}

TEST(Noise, ReadoutFlipsAreIndependentPerBit) {
  const std::vector<double> dist{1.0, 0.0, 0.0, 0.0};
  const double f = 0.1;
  const auto out = apply_readout_noise(dist, 2, f);
  EXPECT_NEAR(out[0], (1 - f) * (1 - f), 1e-15);
  EXPECT_NEAR(out[1], f * (1 - f), 1e-15);
  EXPECT_NEAR(out[2], f * (1 - f), 1e-15);
  EXPECT_NEAR(out[3], f * f, 1e-15);
  EXPECT_EQ(apply_readout_noise(dist, 2, 0.0), dist);
}

TEST(Noise, InvalidRatesRejected) {
  EXPECT_THROW((NoiseParams{-0.1, 0.0, 0.0}.validate()), Error);
  EXPECT_THROW((NoiseParams{0.0, 1.5, 0.0}.validate()), Error);
  EXPECT_NO_THROW(NoiseParams{}.validate());
}

}  // namespace
}  // namespace qpt
