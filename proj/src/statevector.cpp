// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/statevector.hpp"

#include <algorithm>
#include <cmath>

#include "qpt/error.hpp"

namespace qpt {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kDeadBranch = 1e-15;

void check_unitary(const Matrix2& m) {
  // M^dagger M == I
  const Complex a = std::conj(m[0]) * m[0] + std::conj(m[2]) * m[2];
  const Complex b = std::conj(m[0]) * m[1] + std::conj(m[2]) * m[3];
  const Complex d = std::conj(m[1]) * m[1] + std::conj(m[3]) * m[3];
  if (std::abs(a - 1.0) > kUnitaryTol || std::abs(b) > kUnitaryTol || std::abs(d - 1.0) > kUnitaryTol) {
    throw Error(ErrorCode::kNonUnitary, "gate matrix is not unitary within 1e-10");
  }
}

void check_qubits(const StateVector& s, QubitId target, std::span<const Control> controls) {
  const std::size_t n = s.num_qubits();
  if (target >= n) throw Error(ErrorCode::kInvalidQubit, "target out of range");
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (controls[i].qubit >= n) throw Error(ErrorCode::kInvalidQubit, "control out of range");
    if (controls[i].qubit == target) throw Error(ErrorCode::kIndexCollision, "control equals target");
    for (std::size_t j = 0; j < i; ++j) {
      if (controls[j].qubit == controls[i].qubit) throw Error(ErrorCode::kIndexCollision, "duplicate control");
    }
  }
}

}  // namespace

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

StateVector::StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw Error(ErrorCode::kSizeOutOfRange, "num_qubits must be in [1, 24], got " + std::to_string(num_qubits));
  }
  amps_.assign(std::size_t{1} << num_qubits, Complex(0.0, 0.0));
  amps_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t num_qubits, BasisIndex index) {
  StateVector s(num_qubits);
  if (index >= s.dimension()) throw Error(ErrorCode::kInvalidArgument, "basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(std::size_t num_qubits, std::vector<Complex> amps) {
  StateVector s(num_qubits);
  if (amps.size() != s.dimension()) throw Error(ErrorCode::kInvalidArgument, "amplitude count != 2^n");
  s.amps_ = std::move(amps);
  return s;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void StateVector::normalize() {
  const double nrm = norm();
  if (nrm * nrm < kDeadBranch) throw Error(ErrorCode::kZeroNormBranch, "branch probability below 1e-15");
  for (auto& a : amps_) a /= nrm;
}

StateVector new_zero_state(std::size_t num_qubits) { return StateVector(num_qubits); }

Complex amplitude(const StateVector& state, BasisIndex idx) {
  if (idx >= state.dimension()) throw Error(ErrorCode::kInvalidArgument, "amplitude index out of range");
  return state[idx];
}

void apply_matrix(StateVector& state, const Matrix2& m, QubitId target, std::span<const Control> controls) {
  check_qubits(state, target, controls);
  check_unitary(m);
  BasisIndex cmask = 0, cval = 0;
  for (const auto& c : controls) {
    cmask |= state.mask(c.qubit);
    if (c.on_one) cval |= state.mask(c.qubit);
  }
  const BasisIndex tbit = state.mask(target);
  const std::size_t dim = state.dimension();
  for (BasisIndex i = 0; i < dim; ++i) {
    if ((i & tbit) || (i & cmask) != cval) continue;
    const Complex a0 = state[i], a1 = state[i | tbit];
    state[i] = m[0] * a0 + m[1] * a1;
    state[i | tbit] = m[2] * a0 + m[3] * a1;
  }
}

void apply_gate(StateVector& state, const GateInstance& gate) {
  gate.validate(state.num_qubits());
  if (gate.kind == GateKind::kSwap) {
    // Controlled swap as three controlled-X with the extra control set.
    std::vector<Control> ctl = gate.controls;
    const QubitId a = gate.targets[0], b = gate.targets[1];
    const Matrix2 x = matrix_of(GateKind::kX, {});
    ctl.push_back({a, true});
    apply_matrix(state, x, b, ctl);
    ctl.back() = {b, true};
    apply_matrix(state, x, a, ctl);
    ctl.back() = {a, true};
    apply_matrix(state, x, b, ctl);
    return;
  }
  apply_matrix(state, matrix_of(gate.kind, gate.params), gate.targets[0], gate.controls);
}

void apply_circuit(StateVector& state, const Circuit& circuit) {
  if (circuit.num_qubits() > state.num_qubits()) {
    throw Error(ErrorCode::kInvalidQubit, "circuit is wider than the state");
  }
  for (const auto& g : circuit.gates()) apply_gate(state, g);
}

double probability_of(const StateVector& state, QubitId qubit, int outcome) {
  if (qubit >= state.num_qubits()) throw Error(ErrorCode::kInvalidQubit, "measured qubit out of range");
  const BasisIndex bit = state.mask(qubit);
  double p = 0.0;
  for (BasisIndex i = 0; i < state.dimension(); ++i) {
    if (((i & bit) != 0) == (outcome != 0)) p += std::norm(state[i]);
  }
  return p;
}

double postselect(StateVector& state, QubitId qubit, int outcome) {
  const double p = probability_of(state, qubit, outcome);
  if (p < kDeadBranch) {
    throw Error(ErrorCode::kZeroNormBranch, "selected outcome has probability " + std::to_string(p));
  }
  const BasisIndex bit = state.mask(qubit);
  const double scale = 1.0 / std::sqrt(p);
  for (BasisIndex i = 0; i < state.dimension(); ++i) {
    if (((i & bit) != 0) == (outcome != 0)) {
      state[i] *= scale;
    } else {
      state[i] = 0.0;
    }
  }
  return p;
}

int measure_qubit(StateVector& state, QubitId qubit, Rng& rng) {
  const double p1 = probability_of(state, qubit, 1);
  const int outcome = uniform01(rng) < p1 ? 1 : 0;
  postselect(state, qubit, outcome);
  return outcome;
}

MeasureResult measure_qubit(const StateVector& state, QubitId qubit, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  StateVector copy = state;
  const int outcome = measure_qubit(copy, qubit, rng);
  return {outcome, std::move(copy)};
}

std::vector<double> marginal_probabilities(const StateVector& state, std::span<const QubitId> qubits) {
  for (QubitId q : qubits) {
    if (q >= state.num_qubits()) throw Error(ErrorCode::kInvalidQubit, "sampled qubit out of range");
  }
  std::vector<double> out(std::size_t{1} << qubits.size(), 0.0);
  for (BasisIndex i = 0; i < state.dimension(); ++i) {
    const double p = std::norm(state[i]);
    if (p == 0.0) continue;
    std::size_t key = 0;
    for (QubitId q : qubits) key = (key << 1) | ((i & state.mask(q)) ? 1u : 0u);
    out[key] += p;
  }
  return out;
}

std::string bitstring(std::size_t value, std::size_t nbits) {
  std::string s(nbits, '0');
  for (std::size_t b = 0; b < nbits; ++b) {
    if (value & (std::size_t{1} << (nbits - 1 - b))) s[b] = '1';
  }
  return s;
}

std::map<std::string, std::size_t> sample_counts(const StateVector& state, std::span<const QubitId> qubits,
                                                 std::size_t shots, std::uint64_t rng_seed) {
  if (shots < 1) throw Error(ErrorCode::kInvalidArgument, "shots must be >= 1");
  const auto dist = marginal_probabilities(state, qubits);
  std::vector<double> cdf(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    cdf[i] = acc;
  }
  Rng rng(rng_seed);
  std::vector<std::size_t> bins(dist.size(), 0);
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= dist.size()) idx = dist.size() - 1;
    ++bins[idx];
  }
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i]) out[bitstring(i, qubits.size())] = bins[i];
  }
  return out;
}

void NoiseParams::validate() const {
  for (double p : {depolarizing_1q, depolarizing_2q, readout_flip}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "noise probabilities must lie in [0,1]");
  }
}

void apply_noisy_gate(StateVector& state, const GateInstance& gate, const NoiseParams& noise, Rng& rng) {
  apply_gate(state, gate);
  const double p = gate.arity() >= 2 ? noise.depolarizing_2q : noise.depolarizing_1q;
  if (p <= 0.0) return;
  static constexpr GateKind kPaulis[] = {GateKind::kX, GateKind::kY, GateKind::kZ};
  for (QubitId q : gate.qubits()) {
    if (uniform01(rng) < p) {
      const auto which = static_cast<std::size_t>(uniform01(rng) * 3.0);
      apply_matrix(state, matrix_of(kPaulis[std::min<std::size_t>(which, 2)], {}), q);
    }
  }
}

StateVector apply_noisy_gate(const StateVector& state, const GateInstance& gate, const NoiseParams& noise,
                             std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  StateVector out = state;
  apply_noisy_gate(out, gate, noise, rng);
  return out;
}

std::vector<double> apply_readout_noise(const std::vector<double>& dist, std::size_t nbits, double flip) {
  if (dist.size() != (std::size_t{1} << nbits)) throw Error(ErrorCode::kInvalidArgument, "distribution size != 2^nbits");
  std::vector<double> cur = dist;
  for (std::size_t b = 0; b < nbits; ++b) {
    const std::size_t bit = std::size_t{1} << b;
    std::vector<double> next(cur.size(), 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i] += (1.0 - flip) * cur[i];
      next[i ^ bit] += flip * cur[i];
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace qpt
