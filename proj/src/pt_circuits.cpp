// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/pt_circuits.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "qpt/error.hpp"

namespace qpt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeadBranch = 1e-15;

bool label_bit(BasisIndex label, std::size_t i) { return (label >> (kSystemQubits - 1 - i)) & 1u; }

// Projects onto all flags = 1 and normalizes; returns the branch weight.
double project_ones(StateVector& s, const std::vector<QubitId>& flags) {
  BasisIndex mask = 0;
  for (QubitId q : flags) mask |= s.mask(q);
  double p = 0.0;
  for (BasisIndex i = 0; i < s.dimension(); ++i) {
    if ((i & mask) == mask) p += std::norm(s[i]);
  }
  if (p < kDeadBranch) return p;
  const double scale = 1.0 / std::sqrt(p);
  for (BasisIndex i = 0; i < s.dimension(); ++i) s[i] = ((i & mask) == mask) ? s[i] * scale : Complex(0.0, 0.0);
  return p;
}

double branch_weight(const StateVector& s, QubitId q) { return probability_of(s, q, 1); }

}  // namespace

Circuit RegisterLayout::make_circuit() const {
  Circuit c(total());
  for (std::size_t i = 0; i < ancilla; ++i) c.set_role(anc(i), RegisterRole::kAncilla);
  for (std::size_t i = 0; i < readout; ++i) c.set_role(out(i), RegisterRole::kReadout);
  return c;
}

AncillaLayout RegisterLayout::mcry_layout() const {
  AncillaLayout l;
  l.ancillas = {anc(0), anc(1)};
  l.blocks = {{sys(0), sys(1)}, {sys(2), sys(3)}};
  l.route_all = true;
  return l;
}

BasisIndex RegisterLayout::index_of(BasisIndex label, const std::vector<QubitId>& ones) const {
  const std::size_t n = total();
  BasisIndex idx = label << (n - system);
  for (QubitId q : ones) idx |= BasisIndex{1} << (n - 1 - q);
  return idx;
}

Perturbation Perturbation::hubbard() { return Perturbation{{{0, 1}, {0, 3}, {2, 1}, {2, 3}}, 0.0}; }

Perturbation Perturbation::identity() { return Perturbation{{}, 1.0}; }

RMatrix Perturbation::matrix() const {
  RMatrix m = identity_coefficient * RMatrix::Identity(kSystemDim, kSystemDim);
  const RMatrix id = RMatrix::Identity(kSystemDim, kSystemDim);
  for (const auto& [a, b] : zz_pairs) {
    m += (id - 2.0 * number_operator(a)) * (id - 2.0 * number_operator(b));
  }
  return m;
}

Circuit build_u_in(BasisIndex k, std::size_t num_qubits) {
  if (num_qubits < kSystemQubits || k >= kSystemDim) {
    throw Error(ErrorCode::kInvalidArgument, "U_in needs k < 16 on a register of at least four qubits");
  }
  Circuit c(num_qubits);
  for (std::size_t i = 0; i < kSystemQubits; ++i) {
    if (label_bit(k, i)) c.add(gates::x(i));
  }
  return c;
}

double singlet_mixing_angle(const HubbardParams& params) {
  params.validate();
  const double t = params.t, u = params.U;
  const double r = std::sqrt(u * u / 4 + 4 * t * t);
  return -2.0 * std::acos((2 * t + r) / std::sqrt(u * u / 4 + (2 * t + r) * (2 * t + r)));
}

Circuit build_u_dis(const HubbardParams& params, std::size_t num_qubits) {
  Circuit c(num_qubits);
  const std::array<QubitId, 4> q{0, 1, 2, 3};
  c.add(gates::x(0));
  c.add(gates::x(2));
  append_pivot_ladder(c, q);
  // The extra -pi swaps the pair so label 0 lands on the ground singlet.
  append_special_core(c, SpecialRotation::kPair5_10, singlet_mixing_angle(params) - kPi, q);
  append_special_core(c, SpecialRotation::kPair6_9, kPi / 2, q);
  append_pivot_ladder(c, q);
  c.append(build_fermionic_fourier_pair(0, 1, num_qubits));
  c.append(build_fermionic_fourier_pair(2, 3, num_qubits));
  return c;
}

namespace {

void append_global_phase(Circuit& c, double theta) {
  // P(theta) X P(theta) X = e^{i theta} I on qubit 0.
  c.add(gates::phase(0, theta));
  c.add(gates::x(0));
  c.add(gates::phase(0, theta));
  c.add(gates::x(0));
}

}  // namespace

Circuit build_exp_v(double lambda, int sign, std::size_t num_qubits, const Perturbation& pert) {
  if (sign != 1 && sign != -1) throw Error(ErrorCode::kInvalidArgument, "sign must be +1 or -1");
  Circuit c(num_qubits);
  const double s = sign * lambda;
  for (const auto& [a, b] : pert.zz_pairs) {
    c.add(gates::cnot(a, b));
    c.add(gates::rz(b, -2.0 * s));
    c.add(gates::cnot(a, b));
  }
  if (pert.identity_coefficient != 0.0) append_global_phase(c, s * pert.identity_coefficient);
  return c;
}

void append_controlled_exp_v(Circuit& c, double scale, Control ctl, const Perturbation& pert) {
  for (const auto& [a, b] : pert.zz_pairs) {
    c.add(gates::cnot(a, b));
    c.add(GateInstance{GateKind::kRz, {canonical_angle(-2.0 * scale)}, {b}, {ctl}});
    c.add(gates::cnot(a, b));
  }
  if (pert.identity_coefficient != 0.0) {
    // A controlled global phase is a phase on the control itself.
    const double theta = scale * pert.identity_coefficient;
    if (!ctl.on_one) c.add(gates::x(ctl.qubit));
    c.add(gates::phase(ctl.qubit, theta));
    if (!ctl.on_one) c.add(gates::x(ctl.qubit));
  }
}

void PTCircuitConfig::validate() const {
  if (k >= kSystemDim) throw Error(ErrorCode::kInvalidArgument, "k must be < 16");
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (rus_max_attempts < 1) throw Error(ErrorCode::kInvalidArgument, "rus_max_attempts must be >= 1");
  if (readout_mode == ReadoutMode::kShots) {
    if (!seed) throw Error(ErrorCode::kInvalidArgument, "shots mode requires a seed");
    if (shots < 1) throw Error(ErrorCode::kInvalidArgument, "shots must be >= 1");
  }
}

Circuit build_v_tilde(const Circuit& u_dis, double lambda, std::size_t num_qubits, const Perturbation& pert) {
  Circuit c(num_qubits);
  c.append(u_dis);
  c.append(build_exp_v(lambda, +1, num_qubits, pert));
  c.append(u_dis.inverse());
  return c;
}

LcuCircuit build_v_tilde_difference(const Circuit& u_dis, double lambda, QubitId ancilla, std::size_t num_qubits,
                                    const Perturbation& pert) {
  LcuCircuit out{Circuit(num_qubits), ancilla, 1};
  Circuit& c = out.circuit;
  c.add(gates::h(ancilla));
  c.append(u_dis);
  // Merge both branches per pair so the CNOTs are shared.
  for (const auto& [a, b] : pert.zz_pairs) {
    c.add(gates::cnot(a, b));
    c.add(GateInstance{GateKind::kRz, {canonical_angle(-lambda)}, {b}, {{ancilla, false}}});
    c.add(GateInstance{GateKind::kRz, {canonical_angle(lambda)}, {b}, {{ancilla, true}}});
    c.add(gates::cnot(a, b));
  }
  if (pert.identity_coefficient != 0.0) {
    // e^{+i l c/2} on |0>, e^{-i l c/2} on |1>: Rz(-l c) on the ancilla.
    c.add(gates::rz(ancilla, -lambda * pert.identity_coefficient));
  }
  c.append(u_dis.inverse());
  c.add(gates::h(ancilla));
  return out;
}

double default_constant(const SpectrumTable& spectrum, BasisIndex k) {
  const double ek = spectrum.energy(k);
  double best = std::numeric_limits<double>::infinity();
  double chosen = 0.0;
  for (const auto& level : spectrum.levels) {
    const double gap = ek - level.energy;
    if (std::abs(gap) < kDegeneracyTol) continue;
    if (std::abs(gap) < best) {
      best = std::abs(gap);
      chosen = gap;
    }
  }
  return chosen;
}

UePlan plan_u_e(const SpectrumTable& spectrum, BasisIndex k, double C) {
  if (k >= kSystemDim) throw Error(ErrorCode::kInvalidArgument, "target label out of range");
  const std::size_t k_level = spectrum.level_of(k);
  if (spectrum.levels[k_level].degeneracy() > 1) {
    throw Error(ErrorCode::kDegenerateTarget, "target level is degenerate");
  }

  UePlan plan;
  plan.target_angle.assign(kSystemDim, 0.0);
  const double ek = spectrum.energy(k);
  for (BasisIndex n = 0; n < kSystemDim; ++n) {
    if (spectrum.level_of(n) == k_level) continue;
    const double amp = C / (ek - spectrum.energy(n));
    if (std::abs(amp) > 1.0 + 1e-12) {
      throw Error(ErrorCode::kConstantTooLarge, "|C/(E_k - E_n)| = " + std::to_string(std::abs(amp)) + " > 1");
    }
    plan.target_angle[n] = 2.0 * std::asin(std::clamp(amp, -1.0, 1.0));
  }

  // Default level: the most degenerate one (lowest energy on ties).
  std::vector<std::size_t> others;
  for (std::size_t l = 0; l < spectrum.levels.size(); ++l) {
    if (l != k_level) others.push_back(l);
  }
  if (others.empty()) return plan;
  const std::size_t deflt = *std::min_element(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    const auto da = spectrum.levels[a].degeneracy(), db = spectrum.levels[b].degeneracy();
    return da != db ? da > db : a < b;
  });
  std::vector<std::size_t> grouped;
  for (std::size_t l : others) {
    if (l != deflt) grouped.push_back(l);
  }
  std::stable_sort(grouped.begin(), grouped.end(), [&](std::size_t a, std::size_t b) {
    const auto da = spectrum.levels[a].degeneracy(), db = spectrum.levels[b].degeneracy();
    return da != db ? da > db : spectrum.levels[a].energy > spectrum.levels[b].energy;
  });

  std::vector<double> cum(kSystemDim, 0.0);
  std::vector<bool> done(kSystemDim, false);

  const double theta0 = plan.target_angle[spectrum.levels[deflt].members.front()];
  plan.gates.push_back({{}, theta0, 0, deflt});
  for (auto& v : cum) v += theta0;
  for (BasisIndex m : spectrum.levels[deflt].members) done[m] = true;
  plan.level_order.push_back(deflt);

  // Cubes in order of fewest fixed bits, then by mask and value.
  std::vector<std::pair<unsigned, unsigned>> cubes;
  for (unsigned fixed = 0; fixed <= kSystemQubits; ++fixed) {
    for (unsigned mask = 1; mask < kSystemDim; ++mask) {
      if (static_cast<unsigned>(std::popcount(mask)) != fixed) continue;
      for (unsigned value = 0; value < kSystemDim; ++value) {
        if ((value & ~mask) == 0) cubes.emplace_back(mask, value);
      }
    }
  }

  std::size_t stage = 1;
  for (std::size_t l : grouped) {
    plan.level_order.push_back(l);
    const auto& members = spectrum.levels[l].members;
    std::set<BasisIndex> uncovered(members.begin(), members.end());
    const double phi = plan.target_angle[members.front()];
    while (!uncovered.empty()) {
      std::size_t best_hits = 0;
      std::pair<unsigned, unsigned> best{0, 0};
      for (const auto& [mask, value] : cubes) {
        std::size_t hits = 0;
        bool ok = true;
        double ref = std::numeric_limits<double>::quiet_NaN();
        for (BasisIndex s = 0; s < kSystemDim && ok; ++s) {
          if ((s & mask) != value) continue;
          if (uncovered.count(s)) {
            ++hits;
            if (std::isnan(ref)) {
              ref = cum[s];
            } else if (std::abs(cum[s] - ref) > 1e-12) {
              ok = false;
            }
          } else if (done[s] || spectrum.level_of(s) == l) {
            ok = false;
          }
        }
        if (ok && hits > best_hits) {
          best_hits = hits;
          best = {mask, value};
        }
      }
      const auto [mask, value] = best;
      double theta = 0.0;
      std::vector<Control> ctl;
      for (std::size_t i = 0; i < kSystemQubits; ++i) {
        if (label_bit(mask, i)) ctl.push_back({i, label_bit(value, i)});
      }
      for (BasisIndex s = 0; s < kSystemDim; ++s) {
        if ((s & mask) == value && uncovered.count(s)) {
          theta = phi - cum[s];
          break;
        }
      }
      for (BasisIndex s = 0; s < kSystemDim; ++s) {
        if ((s & mask) != value) continue;
        cum[s] += theta;
        if (uncovered.erase(s)) done[s] = true;
      }
      if (std::abs(theta) > 1e-15) plan.gates.push_back({std::move(ctl), theta, stage, l});
    }
    ++stage;
  }

  plan.zeroing_stage = stage;
  if (std::abs(cum[k]) > 1e-15) {
    std::vector<Control> ctl;
    for (std::size_t i = 0; i < kSystemQubits; ++i) ctl.push_back({i, label_bit(k, i)});
    plan.gates.push_back({std::move(ctl), -cum[k], stage, k_level});
  }
  return plan;
}

Circuit build_u_e(const UePlan& plan, const RegisterLayout& layout) {
  Circuit c = layout.make_circuit();
  for (const auto& g : plan.gates) {
    std::vector<Control> ctl;
    for (const auto& k : g.controls) ctl.push_back({layout.sys(k.qubit), k.on_one});
    c.add(gates::mcry(std::move(ctl), layout.denominator(), g.theta));
  }
  return c;
}

Circuit build_u_e(const SpectrumTable& spectrum, BasisIndex k, double C, const RegisterLayout& layout) {
  return build_u_e(plan_u_e(spectrum, k, C), layout);
}

std::vector<double> full_decomposition_angles(const SpectrumTable& spectrum, BasisIndex k, double C) {
  const UePlan plan = plan_u_e(spectrum, k, C);
  // Moebius inversion over subsets: alpha_S = sum_{T in S} (-1)^{|S-T|} phi_T.
  std::vector<double> alpha(kSystemDim, 0.0);
  for (unsigned s = 0; s < kSystemDim; ++s) {
    for (unsigned t = s;; t = (t - 1) & s) {
      const int sign = (std::popcount(s ^ t) % 2) ? -1 : 1;
      alpha[s] += sign * plan.target_angle[t];
      if (t == 0) break;
    }
  }
  return alpha;
}

Circuit build_u_e_full_decomposition(const std::vector<double>& subset_angles, const RegisterLayout& layout) {
  if (subset_angles.size() != kSystemDim) throw Error(ErrorCode::kInvalidArgument, "need 16 subset angles");
  Circuit c = layout.make_circuit();
  for (unsigned s = 0; s < kSystemDim; ++s) {
    std::vector<Control> ctl;
    for (std::size_t i = 0; i < kSystemQubits; ++i) {
      if (label_bit(s, i)) ctl.push_back({layout.sys(i), true});
    }
    c.add(gates::mcry(std::move(ctl), layout.denominator(), subset_angles[s]));
  }
  return c;
}

Circuit build_u_e_full_decomposition(const SpectrumTable& spectrum, BasisIndex k, double C,
                                     const RegisterLayout& layout) {
  return build_u_e_full_decomposition(full_decomposition_angles(spectrum, k, C), layout);
}

double full_decomposition_probability(const std::vector<double>& subset_angles, BasisIndex n) {
  double total = 0.0;
  for (unsigned s = 0; s < kSystemDim; ++s) {
    if ((s & n) == s) total += subset_angles.at(s);
  }
  const double sn = std::sin(total / 2);
  return sn * sn / 16.0;
}

std::vector<CalibrationRow> calibrate_u_e(const Circuit& u_e, const SpectrumTable& spectrum, BasisIndex k, double C,
                                          ReadoutMode mode, std::size_t shots, std::uint64_t seed,
                                          const RegisterLayout& layout) {
  StateVector s(layout.total());
  for (std::size_t i = 0; i < layout.system; ++i) apply_gate(s, gates::h(layout.sys(i)));
  apply_circuit(s, u_e);

  std::vector<QubitId> read;
  for (std::size_t i = 0; i < layout.system; ++i) read.push_back(layout.sys(i));
  read.push_back(layout.denominator());
  std::vector<double> p_n(kSystemDim, 0.0);
  if (mode == ReadoutMode::kExactAmplitude) {
    const auto dist = marginal_probabilities(s, read);
    for (BasisIndex n = 0; n < kSystemDim; ++n) p_n[n] = dist[(n << 1) | 1u];
  } else {
    const auto counts = sample_counts(s, read, shots, seed);
    for (BasisIndex n = 0; n < kSystemDim; ++n) {
      auto it = counts.find(bitstring((n << 1) | 1u, kSystemQubits + 1));
      p_n[n] = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(shots);
    }
  }

  const double ek = spectrum.energy(k);
  std::vector<CalibrationRow> rows;
  for (std::size_t l = 0; l < spectrum.levels.size(); ++l) {
    const auto& level = spectrum.levels[l];
    CalibrationRow r;
    r.level = l;
    r.energy = level.energy;
    r.energy_difference = level.energy - ek;
    r.degeneracy = level.degeneracy();
    const bool target = std::find(level.members.begin(), level.members.end(), k) != level.members.end();
    r.predicted = target ? 0.0 : C * C / ((ek - level.energy) * (ek - level.energy));
    double var = 0.0;
    for (BasisIndex m : level.members) {
      r.measured += 16.0 * p_n[m];
      if (mode == ReadoutMode::kShots) {
        // Binomial variance of the member's expected frequency.
        const double p = target ? 0.0 : r.predicted / 16.0;
        var += 256.0 * p * (1.0 - p) / static_cast<double>(shots);
      }
    }
    const double d = static_cast<double>(level.degeneracy());
    r.measured /= d;
    r.sigma = std::sqrt(var) / d;
    rows.push_back(r);
  }
  return rows;
}

RusResult run_rus(const StateVector& prepared, const std::vector<QubitId>& flags, ReadoutMode mode,
                  std::uint64_t seed, std::size_t max_attempts) {
  if (max_attempts < 1) throw Error(ErrorCode::kInvalidArgument, "max_attempts must be >= 1");
  StateVector branch = prepared;
  const double p = project_ones(branch, flags);
  if (mode == ReadoutMode::kExactAmplitude) {
    if (p < kDeadBranch) throw Error(ErrorCode::kRusExhausted, "postselected branch has zero probability");
    return {std::move(branch), 1, p};
  }
  Rng rng(seed);
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    if (uniform01(rng) < p) return {std::move(branch), attempt, p};
  }
  throw Error(ErrorCode::kRusExhausted, "no success in " + std::to_string(max_attempts) + " attempts");
}

PtPipeline::PtPipeline(const HubbardParams& params, BasisIndex k, std::optional<double> C, Perturbation pert)
    : params_(params), k_(k), pert_(std::move(pert)) {
  spectrum_ = make_spectrum_table(params_);
  C_ = C ? *C : default_constant(spectrum_, k_);
  // The ZZ circuit misses 4 n1 n2 - ZZsum; nothing is missing otherwise.
  offset_ = pert_.zz_pairs.size() == 4 && pert_.identity_coefficient == 0.0 ? circuit_energy_offset(spectrum_, k_)
                                                                           : 0.0;
  u_dis_ = build_u_dis(params_, layout_.total());
  plan_ = plan_u_e(spectrum_, k_, C_);
  u_e_ = build_u_e(plan_, layout_);
}

void PtPipeline::check(const PTCircuitConfig& cfg) const {
  cfg.validate();
  if (cfg.k != k_) throw Error(ErrorCode::kInvalidArgument, "config k differs from the pipeline target");
  if (cfg.C && *cfg.C != C_) throw Error(ErrorCode::kInvalidArgument, "config C differs from the pipeline constant");
}

Circuit PtPipeline::v_tilde_circuit(const PTCircuitConfig& cfg) const {
  if (cfg.v_mode == VMode::kPlainExp) return build_v_tilde(u_dis_, cfg.lambda, layout_.total(), pert_);
  return build_v_tilde_difference(u_dis_, cfg.lambda, layout_.lcu_forward(), layout_.total(), pert_).circuit;
}

Circuit PtPipeline::v_tilde_adjoint_circuit(const PTCircuitConfig& cfg) const {
  if (cfg.v_mode == VMode::kPlainExp) return build_v_tilde(u_dis_, cfg.lambda, layout_.total(), pert_).inverse();
  return build_v_tilde_difference(u_dis_, cfg.lambda, layout_.lcu_backward(), layout_.total(), pert_)
      .circuit.inverse();
}

Circuit PtPipeline::psi1_circuit(const PTCircuitConfig& cfg) const {
  Circuit c = layout_.make_circuit();
  c.append(build_u_in(k_, layout_.total()));
  c.append(v_tilde_circuit(cfg));
  c.append(u_e_);
  return c;
}

std::vector<QubitId> PtPipeline::success_flags(const PTCircuitConfig& cfg) const {
  if (cfg.v_mode == VMode::kPlainExp) return {layout_.denominator()};
  return {layout_.denominator(), layout_.lcu_forward()};
}

StateVector PtPipeline::prepared_state(const PTCircuitConfig& cfg) const {
  StateVector s(layout_.total());
  apply_circuit(s, build_u_in(k_, layout_.total()));
  apply_circuit(s, v_tilde_circuit(cfg));
  if (cfg.v_mode == VMode::kDifference && branch_weight(s, layout_.lcu_forward()) < kDeadBranch) {
    throw Error(ErrorCode::kPostselectionFailure, "LCU ancilla |1> branch has probability below 1e-15");
  }
  apply_circuit(s, u_e_);
  return s;
}

RusResult PtPipeline::rus(const PTCircuitConfig& cfg, const StateVector& prepared, std::uint64_t seed) const {
  return run_rus(prepared, success_flags(cfg), cfg.readout_mode, seed, cfg.rus_max_attempts);
}

RusResult PtPipeline::repeated_rus(const PTCircuitConfig& cfg, const StateVector& prepared) const {
  Rng master(*cfg.seed);
  RusResult first = rus(cfg, prepared, master());
  std::size_t total = first.attempts;
  for (std::size_t s = 1; s < cfg.shots; ++s) total += rus(cfg, prepared, master()).attempts;
  first.attempts = total;
  first.success_prob = static_cast<double>(cfg.shots) / static_cast<double>(total);
  return first;
}

BasisIndex PtPipeline::readout_index(const PTCircuitConfig& cfg, bool after_adjoint) const {
  std::vector<QubitId> ones{layout_.denominator()};
  if (cfg.v_mode == VMode::kDifference) {
    ones.push_back(layout_.lcu_forward());
    if (after_adjoint) ones.push_back(layout_.lcu_backward());
  }
  return layout_.index_of(0, ones);
}

double PtPipeline::psi1_factor(const PTCircuitConfig& cfg) const {
  // i sin(lambda V / 2) carries half the first-order amplitude.
  return cfg.v_mode == VMode::kDifference ? 2.0 : 1.0;
}

double PtPipeline::estimate_e1(const PTCircuitConfig& cfg) const {
  check(cfg);
  if (cfg.lambda == 0.0) throw Error(ErrorCode::kInvalidArgument, "e1 needs lambda > 0");
  if (cfg.readout_mode == ReadoutMode::kExactAmplitude) {
    StateVector s(layout_.total());
    apply_circuit(s, build_u_in(k_, layout_.total()));
    apply_circuit(s, v_tilde_circuit(cfg));
    std::vector<QubitId> ones;
    if (cfg.v_mode == VMode::kDifference) ones.push_back(layout_.lcu_forward());
    const Complex a = s[layout_.index_of(k_, ones)];
    return a.imag() / cfg.lambda * psi1_factor(cfg) + offset_;
  }
  // Hadamard test: P0 - P1 = Im <k|V~|k> with an S^dagger before the last H.
  const QubitId anc = layout_.lcu_forward();
  Circuit c = layout_.make_circuit();
  c.add(gates::h(anc));
  c.append(build_u_in(k_, layout_.total()));
  c.append(u_dis_);
  append_controlled_exp_v(c, cfg.lambda, {anc, true}, pert_);
  c.append(u_dis_.inverse());
  c.add(gates::single(GateKind::kSdg, anc));
  c.add(gates::h(anc));
  StateVector s(layout_.total());
  apply_circuit(s, c);
  const std::vector<QubitId> read{anc};
  const auto counts = sample_counts(s, read, cfg.shots, *cfg.seed);
  const auto n0 = counts.count("0") ? counts.at("0") : 0;
  const auto n1 = counts.count("1") ? counts.at("1") : 0;
  const double im = (static_cast<double>(n0) - static_cast<double>(n1)) / static_cast<double>(cfg.shots);
  return im / cfg.lambda + offset_;
}

EstimateRecord PtPipeline::estimate_psi1(const PTCircuitConfig& cfg) const {
  check(cfg);
  EstimateRecord rec;
  rec.lambda = cfg.lambda;
  rec.psi1_est.assign(kSystemDim, Complex(0.0, 0.0));
  const StateVector prepared = prepared_state(cfg);
  const double scale = psi1_factor(cfg) / (cfg.lambda * C_);
  const auto flags = success_flags(cfg);

  if (cfg.readout_mode == ReadoutMode::kExactAmplitude) {
    const RusResult r = rus(cfg, prepared, 0);
    rec.rus_attempts = r.attempts;
    rec.success_prob = r.success_prob;
    const double amp = std::sqrt(r.success_prob);
    for (BasisIndex m = 0; m < kSystemDim; ++m) {
      // amplitude = C (i lambda V_mk) / (E_k - E_m): divide by i lambda C.
      rec.psi1_est[m] = r.state[layout_.index_of(m, flags)] * amp * scale / Complex(0.0, 1.0);
    }
    return rec;
  }

  const RusResult r = repeated_rus(cfg, prepared);
  rec.rus_attempts = r.attempts;
  rec.success_prob = r.success_prob;
  rec.psi1_phase_resolved = false;
  std::vector<QubitId> sys;
  for (std::size_t i = 0; i < layout_.system; ++i) sys.push_back(layout_.sys(i));
  const auto counts = sample_counts(r.state, sys, cfg.shots, *cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& [bits, n] : counts) {
    const BasisIndex m = std::stoul(bits, nullptr, 2);
    const double f = static_cast<double>(n) / static_cast<double>(cfg.shots);
    rec.psi1_est[m] = std::sqrt(f * r.success_prob) * std::abs(scale);
  }
  return rec;
}

namespace {

GateInstance flag_readout(const RegisterLayout& layout, BasisIndex read_index) {
  // Fires on system = |0000>, q' = |00>, and every set readout bit.
  std::vector<Control> ctl;
  const std::size_t n = layout.total();
  for (QubitId q = 0; q < n; ++q) {
    if (q == layout.flag()) continue;
    const bool one = (read_index >> (n - 1 - q)) & 1u;
    if (q >= layout.out(0) && !one) continue;
    ctl.push_back({q, one});
  }
  return gates::mcx(std::move(ctl), layout.flag());
}

}  // namespace

EstimateRecord PtPipeline::estimate_e2(const PTCircuitConfig& cfg) const {
  check(cfg);
  EstimateRecord rec;
  rec.lambda = cfg.lambda;
  const StateVector prepared = prepared_state(cfg);
  const double f = psi1_factor(cfg);
  const double denom = C_ * cfg.lambda * cfg.lambda;
  const BasisIndex idx = readout_index(cfg, true);

  RusResult r = cfg.readout_mode == ReadoutMode::kExactAmplitude ? rus(cfg, prepared, 0) : repeated_rus(cfg, prepared);
  rec.rus_attempts = r.attempts;
  rec.success_prob = r.success_prob;
  apply_circuit(r.state, v_tilde_adjoint_circuit(cfg));
  apply_circuit(r.state, build_u_in(k_, layout_.total()).inverse());

  if (cfg.readout_mode == ReadoutMode::kExactAmplitude) {
    const Complex a = r.state[idx];
    rec.e2_est = a.real() * std::sqrt(r.success_prob) / denom * f * f;
    return rec;
  }
  apply_gate(r.state, flag_readout(layout_, idx));
  const std::vector<QubitId> read{layout_.flag()};
  const auto counts = sample_counts(r.state, read, cfg.shots, *cfg.seed ^ 0x2545f4914f6cdd1dULL);
  const double freq = counts.count("1") ? static_cast<double>(counts.at("1")) / static_cast<double>(cfg.shots) : 0.0;
  rec.e2_est = std::sqrt(freq) * std::sqrt(r.success_prob) / std::abs(denom) * f * f;
  rec.e2_sign_ambiguous = true;
  return rec;
}

EstimateRecord PtPipeline::estimate_e2_no_rus(const PTCircuitConfig& cfg) const {
  check(cfg);
  EstimateRecord rec;
  rec.lambda = cfg.lambda;
  StateVector s = prepared_state(cfg);
  apply_circuit(s, v_tilde_adjoint_circuit(cfg));
  apply_circuit(s, build_u_in(k_, layout_.total()).inverse());
  const double f = psi1_factor(cfg);
  const double denom = C_ * cfg.lambda * cfg.lambda;
  const BasisIndex idx = readout_index(cfg, true);

  if (cfg.readout_mode == ReadoutMode::kExactAmplitude) {
    rec.e2_est = s[idx].real() / denom * f * f;
    return rec;
  }
  apply_gate(s, flag_readout(layout_, idx));
  const std::vector<QubitId> read{layout_.flag()};
  const auto counts = sample_counts(s, read, cfg.shots, *cfg.seed);
  const double freq = counts.count("1") ? static_cast<double>(counts.at("1")) / static_cast<double>(cfg.shots) : 0.0;
  rec.e2_est = std::sqrt(freq) / std::abs(denom) * f * f;
  rec.e2_sign_ambiguous = true;
  return rec;
}

EstimateRecord PtPipeline::run(const PTCircuitConfig& cfg) const {
  EstimateRecord rec = estimate_psi1(cfg);
  const EstimateRecord e2 = estimate_e2(cfg);
  rec.e1_est = estimate_e1(cfg);
  rec.e2_est = e2.e2_est;
  rec.e2_sign_ambiguous = e2.e2_sign_ambiguous;
  return rec;
}

namespace {

struct LineFit {
  double intercept = 0.0;
  double coef = 0.0;
  double residual = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd a(x.size(), 2);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = x[i];
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2) throw Error(ErrorCode::kRankDeficient, "lambda grid has fewer than two distinct values");
  const Eigen::VectorXd c = qr.solve(b);
  return {c(0), c(1), (a * c - b).norm()};
}

}  // namespace

FitResult fit_corrections(const std::vector<EstimateRecord>& records) {
  if (records.size() < 3) throw Error(ErrorCode::kRankDeficient, "fit needs at least three records");
  std::vector<double> lam, lam2, e1, e2;
  for (const auto& r : records) {
    lam.push_back(r.lambda);
    lam2.push_back(r.lambda * r.lambda);
    e1.push_back(r.e1_est);
    e2.push_back(r.e2_est);
  }
  FitResult out;
  const LineFit f1 = least_squares(lam, e1);
  const LineFit f2 = least_squares(lam2, e2);
  out.E1_fit = f1.intercept;
  out.E1_slope = f1.coef;
  out.e1_residual = f1.residual;
  out.E2_fit = f2.intercept;
  out.E2_curvature = f2.coef;
  out.e2_residual = f2.residual;

  const std::size_t dim = records.front().psi1_est.size();
  out.psi1_fit.assign(dim, Complex(0.0, 0.0));
  double res2 = 0.0;
  for (std::size_t m = 0; m < dim; ++m) {
    std::vector<double> re, im;
    for (const auto& r : records) {
      if (r.psi1_est.size() != dim) throw Error(ErrorCode::kInvalidArgument, "psi1 length differs between records");
      re.push_back(r.psi1_est[m].real());
      im.push_back(r.psi1_est[m].imag());
    }
    const LineFit fr = least_squares(lam, re), fi = least_squares(lam, im);
    out.psi1_fit[m] = {fr.intercept, fi.intercept};
    res2 += fr.residual * fr.residual + fi.residual * fi.residual;
  }
  out.psi1_residual = std::sqrt(res2);
  return out;
}

}  // namespace qpt
