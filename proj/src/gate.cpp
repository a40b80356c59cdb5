// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/gate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qpt/error.hpp"

namespace qpt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSizeOutOfRange: return "size-out-of-range";
    case ErrorCode::kNonUnitary: return "non-unitary";
    case ErrorCode::kIndexCollision: return "index-collision";
    case ErrorCode::kInvalidQubit: return "invalid-qubit";
    case ErrorCode::kZeroNormBranch: return "zero-norm-branch";
    case ErrorCode::kInsufficientAncilla: return "insufficient-ancilla";
    case ErrorCode::kDegenerateSplit: return "degeneracy-split";
    case ErrorCode::kDegenerateTarget: return "degenerate-target";
    case ErrorCode::kConstantTooLarge: return "constant-too-large";
    case ErrorCode::kPostselectionFailure: return "postselection-failure";
    case ErrorCode::kRusExhausted: return "rus-exhausted";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kUnsupportedGate: return "unsupported-gate";
    case ErrorCode::kUnmappedQubit: return "unmapped-qubit";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kConfig: return "config-error";
  }
  return "unknown";
}

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::kI: return "id";
    case GateKind::kX: return "x";
    case GateKind::kY: return "y";
    case GateKind::kZ: return "z";
    case GateKind::kH: return "h";
    case GateKind::kS: return "s";
    case GateKind::kSdg: return "sdg";
    case GateKind::kT: return "t";
    case GateKind::kTdg: return "tdg";
    case GateKind::kRy: return "ry";
    case GateKind::kRz: return "rz";
    case GateKind::kPhase: return "u1";
    case GateKind::kSwap: return "swap";
  }
  return "?";
}

std::size_t param_count(GateKind kind) {
  switch (kind) {
    case GateKind::kRy:
    case GateKind::kRz:
    case GateKind::kPhase:
      return 1;
    default:
      return 0;
  }
}

std::size_t target_count(GateKind kind) { return kind == GateKind::kSwap ? 2 : 1; }

double canonical_angle(double theta) {
  constexpr double kFour = 4.0 * std::numbers::pi;
  double r = std::fmod(theta, 2.0 * kFour);
  if (r > kFour) r -= 2.0 * kFour;
  if (r <= -kFour) r += 2.0 * kFour;
  return r;
}

Matrix2 matrix_of(GateKind kind, const std::vector<double>& params) {
  const Complex i(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::kI: return {1, 0, 0, 1};
    case GateKind::kX: return {0, 1, 1, 0};
    case GateKind::kY: return {0, -i, i, 0};
    case GateKind::kZ: return {1, 0, 0, -1};
    case GateKind::kH: return {s, s, s, -s};
    case GateKind::kS: return {1, 0, 0, i};
    case GateKind::kSdg: return {1, 0, 0, -i};
    case GateKind::kT: return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
    case GateKind::kTdg: return {1, 0, 0, std::polar(1.0, -std::numbers::pi / 4)};
    case GateKind::kRy: {
      const double c = std::cos(params.at(0) / 2), sn = std::sin(params.at(0) / 2);
      return {c, -sn, sn, c};
    }
    case GateKind::kRz: {
      const double h = params.at(0) / 2;
      return {std::polar(1.0, -h), 0, 0, std::polar(1.0, h)};
    }
    case GateKind::kPhase: return {1, 0, 0, std::polar(1.0, params.at(0))};
    case GateKind::kSwap: break;
  }
  throw Error(ErrorCode::kUnsupportedGate, std::string("no 2x2 matrix for ") + gate_name(kind));
}

std::vector<QubitId> GateInstance::qubits() const {
  std::vector<QubitId> out;
  out.reserve(arity());
  for (const auto& c : controls) out.push_back(c.qubit);
  out.insert(out.end(), targets.begin(), targets.end());
  return out;
}

GateInstance GateInstance::inverse() const {
  GateInstance g = *this;
  switch (kind) {
    case GateKind::kS: g.kind = GateKind::kSdg; break;
    case GateKind::kSdg: g.kind = GateKind::kS; break;
    case GateKind::kT: g.kind = GateKind::kTdg; break;
    case GateKind::kTdg: g.kind = GateKind::kT; break;
    case GateKind::kRy:
    case GateKind::kRz:
    case GateKind::kPhase:
      g.params[0] = -g.params[0];
      break;
    default: break;
  }
  return g;
}

void GateInstance::validate(std::size_t num_qubits) const {
  if (targets.size() != target_count(kind)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("wrong target count for ") + gate_name(kind));
  }
  if (params.size() != param_count(kind)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("wrong parameter count for ") + gate_name(kind));
  }
  std::set<QubitId> seen;
  for (QubitId q : qubits()) {
    if (q >= num_qubits) {
      throw Error(ErrorCode::kInvalidQubit, "qubit " + std::to_string(q) + " >= " + std::to_string(num_qubits));
    }
    if (!seen.insert(q).second) {
      throw Error(ErrorCode::kIndexCollision, "qubit " + std::to_string(q) + " used twice");
    }
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw Error(ErrorCode::kInvalidArgument, "non-finite gate angle");
  }
}

namespace gates {

GateInstance single(GateKind kind, QubitId q, std::vector<double> params) {
  for (double& p : params) p = canonical_angle(p);
  return GateInstance{kind, std::move(params), {q}, {}};
}
GateInstance x(QubitId q) { return single(GateKind::kX, q); }
GateInstance h(QubitId q) { return single(GateKind::kH, q); }
GateInstance z(QubitId q) { return single(GateKind::kZ, q); }
GateInstance ry(QubitId q, double theta) { return single(GateKind::kRy, q, {theta}); }
GateInstance rz(QubitId q, double theta) { return single(GateKind::kRz, q, {theta}); }
GateInstance phase(QubitId q, double theta) { return single(GateKind::kPhase, q, {theta}); }

GateInstance cnot(QubitId control, QubitId target) {
  return GateInstance{GateKind::kX, {}, {target}, {{control, true}}};
}
GateInstance toffoli(QubitId c1, QubitId c2, QubitId target) {
  return GateInstance{GateKind::kX, {}, {target}, {{c1, true}, {c2, true}}};
}
GateInstance swap(QubitId a, QubitId b) { return GateInstance{GateKind::kSwap, {}, {a, b}, {}}; }
GateInstance cry(QubitId control, QubitId target, double theta) {
  return GateInstance{GateKind::kRy, {canonical_angle(theta)}, {target}, {{control, true}}};
}
GateInstance cphase(QubitId control, QubitId target, double theta) {
  return GateInstance{GateKind::kPhase, {canonical_angle(theta)}, {target}, {{control, true}}};
}
GateInstance mcx(std::vector<Control> controls, QubitId target) {
  return GateInstance{GateKind::kX, {}, {target}, std::move(controls)};
}
GateInstance mcry(std::vector<Control> controls, QubitId target, double theta) {
  return GateInstance{GateKind::kRy, {canonical_angle(theta)}, {target}, std::move(controls)};
}

}  // namespace gates

Circuit::Circuit(std::size_t num_qubits) : num_qubits_(num_qubits) {}

void Circuit::add(GateInstance gate) {
  gate.validate(num_qubits_);
  gates_.push_back(std::move(gate));
}

void Circuit::append(const Circuit& other) {
  if (other.num_qubits_ > num_qubits_) {
    throw Error(ErrorCode::kInvalidQubit, "appended circuit is wider than the host circuit");
  }
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
}

Circuit Circuit::inverse() const {
  Circuit out(num_qubits_);
  out.roles_ = roles_;
  out.gates_.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(it->inverse());
  return out;
}

void Circuit::set_role(QubitId q, RegisterRole role) {
  if (q >= num_qubits_) throw Error(ErrorCode::kInvalidQubit, "role for qubit outside circuit");
  roles_[q] = role;
}

RegisterRole Circuit::role(QubitId q) const {
  auto it = roles_.find(q);
  return it == roles_.end() ? RegisterRole::kSystem : it->second;
}

std::vector<QubitId> Circuit::qubits_with_role(RegisterRole r) const {
  std::vector<QubitId> out;
  for (QubitId q = 0; q < num_qubits_; ++q) {
    if (role(q) == r) out.push_back(q);
  }
  return out;
}

}  // namespace qpt
