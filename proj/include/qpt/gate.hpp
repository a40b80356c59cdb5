// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace qpt {

using Complex = std::complex<double>;
using QubitId = std::size_t;
using BasisIndex = std::size_t;

// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Matrix2 = std::array<Complex, 4>;

enum class GateKind { kI, kX, kY, kZ, kH, kS, kSdg, kT, kTdg, kRy, kRz, kPhase, kSwap };

const char* gate_name(GateKind kind);
std::size_t param_count(GateKind kind);
std::size_t target_count(GateKind kind);

// on_one=false is an open control (fires when the qubit reads 0).
struct Control {
  QubitId qubit = 0;
  bool on_one = true;

  bool operator==(const Control&) const = default;
};

struct GateInstance {
  GateKind kind = GateKind::kI;
  std::vector<double> params;
  std::vector<QubitId> targets;
  std::vector<Control> controls;

  bool operator==(const GateInstance&) const = default;

  // Every qubit the gate touches, controls first.
  std::vector<QubitId> qubits() const;
  std::size_t arity() const { return targets.size() + controls.size(); }
  GateInstance inverse() const;
  bool is_controlled_x() const { return kind == GateKind::kX && targets.size() == 1; }

  // Throws kInvalidQubit / kIndexCollision / kInvalidArgument.
  void validate(std::size_t num_qubits) const;
};

// 2x2 matrix of a single-target kind; kSwap has no 2x2 form.
Matrix2 matrix_of(GateKind kind, const std::vector<double>& params);

// Maps an angle into the canonical range (-4pi, 4pi].
double canonical_angle(double theta);

namespace gates {
GateInstance single(GateKind kind, QubitId q, std::vector<double> params = {});
GateInstance x(QubitId q);
GateInstance h(QubitId q);
GateInstance z(QubitId q);
GateInstance ry(QubitId q, double theta);
GateInstance rz(QubitId q, double theta);
GateInstance phase(QubitId q, double theta);
GateInstance cnot(QubitId control, QubitId target);
GateInstance toffoli(QubitId c1, QubitId c2, QubitId target);
GateInstance swap(QubitId a, QubitId b);
GateInstance cry(QubitId control, QubitId target, double theta);
GateInstance cphase(QubitId control, QubitId target, double theta);
GateInstance mcx(std::vector<Control> controls, QubitId target);
GateInstance mcry(std::vector<Control> controls, QubitId target, double theta);
}  // namespace gates

enum class RegisterRole { kSystem, kAncilla, kReadout };

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t num_qubits);

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<GateInstance>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  void add(GateInstance gate);
  void append(const Circuit& other);
  Circuit inverse() const;

  void set_role(QubitId q, RegisterRole role);
  RegisterRole role(QubitId q) const;
  const std::map<QubitId, RegisterRole>& roles() const { return roles_; }
  std::vector<QubitId> qubits_with_role(RegisterRole role) const;

 private:
  std::size_t num_qubits_ = 0;
  std::vector<GateInstance> gates_;
  std::map<QubitId, RegisterRole> roles_;
};

}  // namespace qpt
