// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qpt/gate.hpp"
#include "qpt/gate_library.hpp"
#include "qpt/hubbard.hpp"
#include "qpt/statevector.hpp"

namespace qpt {

// Qubit layout of the full estimation register: system q (4), ancillas q'
// (2, used by the multi-controlled lowering), then readout qubits:
// q'' (energy-denominator flag), two LCU ancillas, and a final flag.
struct RegisterLayout {
  std::size_t system = kSystemQubits;
  std::size_t ancilla = 2;
  std::size_t readout = 4;

  std::size_t total() const { return system + ancilla + readout; }
  QubitId sys(std::size_t i) const { return i; }
  QubitId anc(std::size_t i) const { return system + i; }
  QubitId out(std::size_t i) const { return system + ancilla + i; }

  QubitId denominator() const { return out(0); }
  QubitId lcu_forward() const { return out(1); }
  QubitId lcu_backward() const { return out(2); }
  QubitId flag() const { return out(3); }

  Circuit make_circuit() const;
  // {q1,q2} -> q'1, {q3,q4} -> q'2, every gate routed through q'.
  AncillaLayout mcry_layout() const;
  // Basis index with the system register at `label` and the listed qubits set.
  BasisIndex index_of(BasisIndex label, const std::vector<QubitId>& ones = {}) const;
};

// exp(i * lambda * V) with V = identity_coefficient * I + sum of Z_a Z_b.
struct Perturbation {
  std::vector<std::pair<QubitId, QubitId>> zz_pairs;
  double identity_coefficient = 0.0;

  // The four inter-site pairs (1u,2u), (1u,2d), (1d,2u), (1d,2d).
  static Perturbation hubbard();
  static Perturbation identity();
  RMatrix matrix() const;
};

Circuit build_u_in(BasisIndex k, std::size_t num_qubits = kSystemQubits);

// Angle of the (5,10) rotation that mixes the two half-filled singlets.
double singlet_mixing_angle(const HubbardParams& params);

// Time order: X on q1,q3; the two special rotations on a shared ladder;
// fermionic Fourier blocks on (q1,q2) and (q3,q4). Column n of its unitary
// is the unperturbed eigenstate labelled n.
Circuit build_u_dis(const HubbardParams& params, std::size_t num_qubits = kSystemQubits);

// sign * lambda * V exponentiated, one CNOT-Rz-CNOT block per ZZ pair.
Circuit build_exp_v(double lambda, int sign, std::size_t num_qubits = kSystemQubits,
                    const Perturbation& pert = Perturbation::hubbard());

// Adds exp(i * scale * V) controlled on `ctl`.
void append_controlled_exp_v(Circuit& c, double scale, Control ctl, const Perturbation& pert);

enum class VMode { kPlainExp, kDifference };
enum class ReadoutMode { kExactAmplitude, kShots };

struct PTCircuitConfig {
  BasisIndex k = 0;
  double lambda = 0.1;
  std::optional<double> C;  // default: E_k minus the nearest other level
  VMode v_mode = VMode::kPlainExp;
  ReadoutMode readout_mode = ReadoutMode::kExactAmplitude;
  std::size_t shots = 32000;
  std::optional<std::uint64_t> seed;
  std::size_t rus_max_attempts = 1'000'000;

  void validate() const;
};

// U_dis^dagger exp(i lambda V) U_dis on the system register.
Circuit build_v_tilde(const Circuit& u_dis, double lambda, std::size_t num_qubits,
                      const Perturbation& pert = Perturbation::hubbard());

struct LcuCircuit {
  Circuit circuit;
  QubitId ancilla = 0;
  int postselect = 1;
};

// H(a); U_dis; exp(+i lambda V/2) if a=0, exp(-i lambda V/2) if a=1; U_dis^dagger; H(a).
// The a: 0 -> 1 block is i sin(lambda V~ / 2).
LcuCircuit build_v_tilde_difference(const Circuit& u_dis, double lambda, QubitId ancilla, std::size_t num_qubits,
                                    const Perturbation& pert = Perturbation::hubbard());

// Default constant: E_k minus the closest other level, so the largest
// denominator amplitude is exactly 1.
double default_constant(const SpectrumTable& spectrum, BasisIndex k);

// One multi-controlled Ry on q''. stage 0 is the default rotation, stage
// L is the L-th grouped level, and the target-zeroing gate is last.
struct UeGate {
  std::vector<Control> controls;
  double theta = 0.0;
  std::size_t stage = 0;
  std::size_t level = 0;  // spectrum level the gate finalizes
};

struct UePlan {
  std::vector<UeGate> gates;
  std::vector<double> target_angle;  // per label
  std::vector<std::size_t> level_order;  // default level first
  std::size_t zeroing_stage = 0;
};

// Greedy layering: default level, then each remaining level covered by
// the largest control cubes that avoid finalized states, then zeroing.
UePlan plan_u_e(const SpectrumTable& spectrum, BasisIndex k, double C);

Circuit build_u_e(const SpectrumTable& spectrum, BasisIndex k, double C, const RegisterLayout& layout = {});
Circuit build_u_e(const UePlan& plan, const RegisterLayout& layout);

// Angles indexed by control subset (bit mask in label convention).
std::vector<double> full_decomposition_angles(const SpectrumTable& spectrum, BasisIndex k, double C);
Circuit build_u_e_full_decomposition(const std::vector<double>& subset_angles, const RegisterLayout& layout = {});
Circuit build_u_e_full_decomposition(const SpectrumTable& spectrum, BasisIndex k, double C,
                                     const RegisterLayout& layout = {});
// Table S1 closed form: (1/16) sin^2(sum_{S subset of n} alpha_S / 2).
double full_decomposition_probability(const std::vector<double>& subset_angles, BasisIndex n);

struct CalibrationRow {
  std::size_t level = 0;
  double energy = 0.0;
  double energy_difference = 0.0;  // E_n - E_k
  std::size_t degeneracy = 0;
  double measured = 0.0;   // 16 * P_n averaged over level members
  double predicted = 0.0;  // C^2 / (E_k - E_n)^2
  double sigma = 0.0;      // shot-noise standard error of `measured`
};

// Hadamards on q, then U_e; P_n = P(q = n, q'' = 1).
std::vector<CalibrationRow> calibrate_u_e(const Circuit& u_e, const SpectrumTable& spectrum, BasisIndex k, double C,
                                          ReadoutMode mode, std::size_t shots = 32000, std::uint64_t seed = 0,
                                          const RegisterLayout& layout = {});

struct RusResult {
  StateVector state;
  std::size_t attempts = 0;
  double success_prob = 0.0;
};

// Repeats preparation until every flag qubit reads 1. Exact mode takes the
// branch directly (attempts = 1). Throws kRusExhausted.
RusResult run_rus(const StateVector& prepared, const std::vector<QubitId>& flags, ReadoutMode mode,
                  std::uint64_t seed, std::size_t max_attempts);

struct EstimateRecord {
  double lambda = 0.0;
  double e1_est = 0.0;
  std::vector<Complex> psi1_est;
  double e2_est = 0.0;
  std::size_t rus_attempts = 0;
  double success_prob = 0.0;
  bool psi1_phase_resolved = true;
  bool e2_sign_ambiguous = false;
};

// Holds everything fixed by (params, k, C): spectrum, U_dis, U_e.
class PtPipeline {
 public:
  PtPipeline(const HubbardParams& params, BasisIndex k, std::optional<double> C = {},
             Perturbation pert = Perturbation::hubbard());

  const SpectrumTable& spectrum() const { return spectrum_; }
  const RegisterLayout& layout() const { return layout_; }
  const Circuit& u_dis() const { return u_dis_; }
  const Circuit& u_e() const { return u_e_; }
  const UePlan& u_e_plan() const { return plan_; }
  const Perturbation& perturbation() const { return pert_; }
  BasisIndex k() const { return k_; }
  double constant() const { return C_; }
  // Scalar the circuits drop; added back to e1.
  double energy_offset() const { return offset_; }

  Circuit v_tilde_circuit(const PTCircuitConfig& cfg) const;
  // Inverse of v_tilde_circuit, on the backward LCU ancilla in difference mode.
  Circuit v_tilde_adjoint_circuit(const PTCircuitConfig& cfg) const;
  // U_in, V~, U_e: everything before the q'' measurement.
  Circuit psi1_circuit(const PTCircuitConfig& cfg) const;
  std::vector<QubitId> success_flags(const PTCircuitConfig& cfg) const;

  double estimate_e1(const PTCircuitConfig& cfg) const;
  EstimateRecord estimate_psi1(const PTCircuitConfig& cfg) const;
  EstimateRecord estimate_e2(const PTCircuitConfig& cfg) const;
  EstimateRecord estimate_e2_no_rus(const PTCircuitConfig& cfg) const;
  EstimateRecord run(const PTCircuitConfig& cfg) const;

 private:
  void check(const PTCircuitConfig& cfg) const;
  StateVector prepared_state(const PTCircuitConfig& cfg) const;
  RusResult rus(const PTCircuitConfig& cfg, const StateVector& prepared, std::uint64_t seed) const;
  // Shots mode: one RUS run per shot; returns the collapsed state and the
  // success frequency.
  RusResult repeated_rus(const PTCircuitConfig& cfg, const StateVector& prepared) const;
  BasisIndex readout_index(const PTCircuitConfig& cfg, bool after_adjoint) const;
  double psi1_factor(const PTCircuitConfig& cfg) const;

  HubbardParams params_;
  BasisIndex k_;
  Perturbation pert_;
  RegisterLayout layout_;
  SpectrumTable spectrum_;
  double C_;
  double offset_;
  Circuit u_dis_;
  UePlan plan_;
  Circuit u_e_;
};

struct FitResult {
  double E1_fit = 0.0;
  double E1_slope = 0.0;
  double E2_fit = 0.0;
  double E2_curvature = 0.0;
  std::vector<Complex> psi1_fit;
  double e1_residual = 0.0;
  double e2_residual = 0.0;
  double psi1_residual = 0.0;
};

// E1, psi1 fitted as a + b*lambda; E2 as a + c*lambda^2. Intercepts are the
// fitted corrections.
FitResult fit_corrections(const std::vector<EstimateRecord>& records);

}  // namespace qpt
