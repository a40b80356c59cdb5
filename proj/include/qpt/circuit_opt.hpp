// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qpt/gate.hpp"
#include "qpt/gate_library.hpp"
#include "qpt/pt_circuits.hpp"
#include "qpt/statevector.hpp"

namespace qpt {

struct CouplingMap {
  std::vector<std::size_t> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::map<QubitId, std::size_t> logical_map;

  bool adjacent(std::size_t a, std::size_t b) const;
  void validate() const;

  // Seven-qubit heavy-hex patch around q'': q1,q2 - q'1 - q'' - q'2 - q3,q4.
  static CouplingMap u_e_patch(const RegisterLayout& layout);
};

struct CouplingViolation {
  std::size_t gate_index = 0;
  QubitId a = 0;
  QubitId b = 0;
};

// Every qubit pair inside a multi-qubit gate that is not an edge.
std::vector<CouplingViolation> check_coupling(const Circuit& circuit, const CouplingMap& map);

struct GateCensus {
  std::size_t one_qubit = 0;
  std::size_t two_qubit = 0;
  std::size_t toffoli = 0;
  std::size_t cccnot = 0;
  std::size_t other = 0;

  std::size_t total() const { return one_qubit + two_qubit + toffoli + cccnot + other; }
  bool operator==(const GateCensus&) const = default;
};

GateCensus gate_census(const Circuit& circuit);

// Expands multi-controlled Ry (through `layout` when the target is a
// readout qubit), turns open controls into X conjugations, and keeps
// CRy/CRz, Toffoli and C^kX as units. This is the "before Toffoli
// lowering" stage.
Circuit decompose_multicontrolled(const Circuit& circuit, const AncillaLayout& layout);

// Only 1-qubit gates, CNOT and Toffoli (positive controls) remain.
// C^kX with k >= 3 borrows clean ancillas from the register's ancilla role.
Circuit lower_to_native(const Circuit& circuit, const AncillaLayout& layout);
Circuit lower_to_native(const Circuit& circuit);

// Six-CNOT Toffoli decomposition split into the part that touches the
// target and the controlled-S tail that acts on the controls only.
std::vector<GateInstance> toffoli_target_part(QubitId c1, QubitId c2, QubitId t);
std::vector<GateInstance> toffoli_control_tail(QubitId c1, QubitId c2);

// Every Toffoli replaced by its full decomposition.
Circuit decompose_toffolis(const Circuit& circuit);

// Pairs Toffolis with the same controls and target when nothing between
// them writes to either control; each pair becomes target-part, middle,
// mirrored target-part (the control tails cancel). Unpaired Toffolis get
// the full decomposition. Adjacent inverse gates are then removed.
Circuit cancel_toffoli_pairs(const Circuit& circuit);

// Removes neighbouring gate pairs that multiply to identity.
Circuit cancel_adjacent_inverses(const Circuit& circuit);

std::string export_qasm(const Circuit& circuit);
// Reads back our own dialect (registers q, qa, qr).
Circuit parse_qasm(const std::string& text);

// Noise runs over the four U_e parts (preceded by Hadamards on q).
struct UePart {
  std::string name;
  Circuit abstract;  // multi-controlled form
  Circuit naive;     // every Toffoli fully decomposed
  Circuit optimized; // Toffoli pairs canceled
};

std::vector<UePart> u_e_parts(const UePlan& plan, const RegisterLayout& layout);

// Exact outcome distribution over `measured` (first = most significant).
std::vector<double> ideal_distribution(const Circuit& circuit, const std::vector<QubitId>& measured);

// Average over Pauli-noise trajectories of the exact outcome distribution,
// with readout flips folded in analytically.
std::vector<double> noisy_distribution(const Circuit& circuit, const std::vector<QubitId>& measured,
                                       const NoiseParams& noise, std::size_t trajectories, std::uint64_t seed);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace qpt
