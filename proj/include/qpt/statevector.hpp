// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qpt/gate.hpp"

namespace qpt {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits, so draws are
// identical across standard library implementations.
double uniform01(Rng& rng);

// Dense 2^n amplitude vector. Qubit 0 is the most significant bit of the
// basis index, so label "0101" on four qubits is index 5.
class StateVector {
 public:
  static constexpr std::size_t kMaxQubits = 24;

  explicit StateVector(std::size_t num_qubits);
  static StateVector basis(std::size_t num_qubits, BasisIndex index);
  static StateVector from_amplitudes(std::size_t num_qubits, std::vector<Complex> amps);

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  Complex operator[](BasisIndex i) const { return amps_[i]; }
  Complex& operator[](BasisIndex i) { return amps_[i]; }
  const std::vector<Complex>& amplitudes() const { return amps_; }

  double norm() const;
  // Scales to unit norm; throws kZeroNormBranch below 1e-15 probability.
  void normalize();

  // Bit mask of qubit q inside a basis index.
  BasisIndex mask(QubitId q) const { return BasisIndex{1} << (num_qubits_ - 1 - q); }

 private:
  std::size_t num_qubits_;
  std::vector<Complex> amps_;
};

StateVector new_zero_state(std::size_t num_qubits);

// Checked read; throws kInvalidArgument when idx is out of range.
Complex amplitude(const StateVector& state, BasisIndex idx);

// Applies a (possibly controlled) 2x2 matrix. Rejects non-unitary input.
void apply_matrix(StateVector& state, const Matrix2& m, QubitId target, std::span<const Control> controls = {});
void apply_gate(StateVector& state, const GateInstance& gate);
void apply_circuit(StateVector& state, const Circuit& circuit);

// Probability that `qubit` reads `outcome`.
double probability_of(const StateVector& state, QubitId qubit, int outcome);

// Projects onto `outcome` and renormalizes; returns the branch probability.
double postselect(StateVector& state, QubitId qubit, int outcome);

struct MeasureResult {
  int outcome;
  StateVector collapsed;
};
MeasureResult measure_qubit(const StateVector& state, QubitId qubit, std::uint64_t rng_seed);
int measure_qubit(StateVector& state, QubitId qubit, Rng& rng);

// Joint distribution over `qubits`; the first listed qubit is the most
// significant bit of the returned index.
std::vector<double> marginal_probabilities(const StateVector& state, std::span<const QubitId> qubits);

// Histogram keyed by bitstrings ("0101"); the state is not modified.
std::map<std::string, std::size_t> sample_counts(const StateVector& state, std::span<const QubitId> qubits,
                                                 std::size_t shots, std::uint64_t rng_seed);

struct NoiseParams {
  double depolarizing_1q = 8.636e-4;
  double depolarizing_2q = 8.636e-3;
  double readout_flip = 1.410e-2;

  static NoiseParams none() { return {0.0, 0.0, 0.0}; }
  void validate() const;
};

// Applies the gate, then on each touched qubit inserts a uniformly random
// X/Y/Z with the 1q or 2q depolarizing probability. Gates touching two or
// more qubits use the 2q rate.
void apply_noisy_gate(StateVector& state, const GateInstance& gate, const NoiseParams& noise, Rng& rng);
StateVector apply_noisy_gate(const StateVector& state, const GateInstance& gate, const NoiseParams& noise,
                             std::uint64_t rng_seed);

// Folds independent per-bit readout flips into a distribution over nbits.
std::vector<double> apply_readout_noise(const std::vector<double>& dist, std::size_t nbits, double flip);

std::string bitstring(std::size_t value, std::size_t nbits);

}  // namespace qpt
