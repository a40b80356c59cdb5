// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/circuit_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "qpt/error.hpp"

namespace qpt {

namespace {

Circuit empty_like(const Circuit& c) {
  Circuit out(c.num_qubits());
  for (const auto& [q, role] : c.roles()) out.set_role(q, role);
  return out;
}

bool is_toffoli(const GateInstance& g) {
  return g.is_controlled_x() && g.controls.size() == 2 && g.controls[0].on_one && g.controls[1].on_one;
}

// Ancilla-role qubits the gate does not touch.
std::vector<QubitId> free_ancillas(const Circuit& c, const GateInstance& g) {
  std::vector<QubitId> out;
  const auto used = g.qubits();
  for (QubitId q : c.qubits_with_role(RegisterRole::kAncilla)) {
    if (std::find(used.begin(), used.end(), q) == used.end()) out.push_back(q);
  }
  return out;
}

// X-conjugates open controls so the gate only has positive controls.
void append_positive(Circuit& out, const GateInstance& g) {
  GateInstance pos = g;
  std::vector<QubitId> flips;
  for (auto& k : pos.controls) {
    if (!k.on_one) {
      flips.push_back(k.qubit);
      k.on_one = true;
    }
  }
  for (QubitId q : flips) out.add(gates::x(q));
  out.add(pos);
  for (QubitId q : flips) out.add(gates::x(q));
}

void append_controlled_rotation(Circuit& out, GateKind kind, QubitId c, QubitId t, double theta) {
  out.add(gates::single(kind, t, {theta / 2}));
  out.add(gates::cnot(c, t));
  out.add(gates::single(kind, t, {-theta / 2}));
  out.add(gates::cnot(c, t));
}

void append_vchain_mcx(Circuit& out, const std::vector<QubitId>& ctl, QubitId target,
                       const std::vector<QubitId>& ancillas) {
  const std::size_t k = ctl.size();
  if (ancillas.size() < k - 2) {
    throw Error(ErrorCode::kInsufficientAncilla,
                std::to_string(k) + "-control X needs " + std::to_string(k - 2) + " clean ancillas");
  }
  Circuit compute(out.num_qubits());
  compute.add(gates::toffoli(ctl[0], ctl[1], ancillas[0]));
  for (std::size_t i = 2; i + 1 < k; ++i) compute.add(gates::toffoli(ancillas[i - 2], ctl[i], ancillas[i - 1]));
  out.append(compute);
  out.add(gates::toffoli(ancillas[k - 3], ctl[k - 1], target));
  out.append(compute.inverse());
}

bool same_gate(const GateInstance& a, const GateInstance& b) {
  if (a.kind != b.kind || a.targets != b.targets || a.controls.size() != b.controls.size()) return false;
  auto ca = a.controls, cb = b.controls;
  auto key = [](const Control& x, const Control& y) { return x.qubit < y.qubit; };
  std::sort(ca.begin(), ca.end(), key);
  std::sort(cb.begin(), cb.end(), key);
  if (ca != cb) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (std::abs(a.params[i] - b.params[i]) > 1e-12) return false;
  }
  return true;
}

bool shares_qubit(const GateInstance& a, const GateInstance& b) {
  for (QubitId p : a.qubits()) {
    for (QubitId q : b.qubits()) {
      if (p == q) return true;
    }
  }
  return false;
}

}  // namespace

bool CouplingMap::adjacent(std::size_t a, std::size_t b) const {
  for (const auto& [x, y] : edges) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

void CouplingMap::validate() const {
  std::set<std::size_t> seen;
  for (const auto& [q, node] : logical_map) {
    if (std::find(nodes.begin(), nodes.end(), node) == nodes.end()) {
      throw Error(ErrorCode::kInvalidArgument, "logical qubit mapped to unknown node");
    }
    if (!seen.insert(node).second) throw Error(ErrorCode::kInvalidArgument, "logical map is not injective");
  }
}

CouplingMap CouplingMap::u_e_patch(const RegisterLayout& layout) {
  CouplingMap m;
  m.nodes = {0, 1, 2, 3, 4, 5, 6};
  m.edges = {{0, 4}, {1, 4}, {4, 6}, {6, 5}, {5, 2}, {5, 3}};
  for (std::size_t i = 0; i < 4; ++i) m.logical_map[layout.sys(i)] = i;
  m.logical_map[layout.anc(0)] = 4;
  m.logical_map[layout.anc(1)] = 5;
  m.logical_map[layout.denominator()] = 6;
  return m;
}

std::vector<CouplingViolation> check_coupling(const Circuit& circuit, const CouplingMap& map) {
  map.validate();
  std::vector<CouplingViolation> out;
  for (std::size_t i = 0; i < circuit.size(); ++i) {
    const auto qs = circuit.gates()[i].qubits();
    for (QubitId q : qs) {
      if (!map.logical_map.count(q)) throw Error(ErrorCode::kUnmappedQubit, "qubit " + std::to_string(q) + " unmapped");
    }
    for (std::size_t a = 0; a < qs.size(); ++a) {
      for (std::size_t b = a + 1; b < qs.size(); ++b) {
        if (!map.adjacent(map.logical_map.at(qs[a]), map.logical_map.at(qs[b]))) out.push_back({i, qs[a], qs[b]});
      }
    }
  }
  return out;
}

GateCensus gate_census(const Circuit& circuit) {
  GateCensus c;
  for (const auto& g : circuit.gates()) {
    const std::size_t n = g.arity();
    if (n == 1) {
      ++c.one_qubit;
    } else if (n == 2) {
      ++c.two_qubit;
    } else if (g.is_controlled_x() && n == 3) {
      ++c.toffoli;
    } else if (g.is_controlled_x() && n == 4) {
      ++c.cccnot;
    } else {
      ++c.other;
    }
  }
  return c;
}

Circuit decompose_multicontrolled(const Circuit& circuit, const AncillaLayout& layout) {
  Circuit out = empty_like(circuit);
  const std::size_t n = circuit.num_qubits();
  for (const auto& g : circuit.gates()) {
    if (g.controls.empty()) {
      out.add(g);
      continue;
    }
    if (g.kind == GateKind::kRy) {
      const QubitId t = g.targets[0];
      if (circuit.role(t) == RegisterRole::kReadout && !layout.ancillas.empty()) {
        out.append(build_mcry(g.controls, t, g.params[0], n, layout));
        continue;
      }
      if (g.controls.size() >= 2) {
        AncillaLayout generic;
        generic.ancillas = free_ancillas(circuit, g);
        out.append(build_mcry(g.controls, t, g.params[0], n, generic));
        continue;
      }
    }
    append_positive(out, g);
  }
  return out;
}

Circuit lower_to_native(const Circuit& circuit, const AncillaLayout& layout) {
  const Circuit mid = decompose_multicontrolled(circuit, layout);
  Circuit out = empty_like(circuit);
  for (const auto& g : mid.gates()) {
    const auto& t = g.targets;
    if (g.kind == GateKind::kI) continue;
    if (g.kind == GateKind::kSwap) {
      Circuit three = empty_like(circuit);
      for (const auto& [a, b] : {std::pair{t[0], t[1]}, std::pair{t[1], t[0]}, std::pair{t[0], t[1]}}) {
        std::vector<Control> ctl = g.controls;
        ctl.push_back({a, true});
        three.add(gates::mcx(std::move(ctl), b));
      }
      out.append(lower_to_native(three, layout));
      continue;
    }
    if (g.controls.empty()) {
      out.add(g);
      continue;
    }
    std::vector<QubitId> ctl;
    for (const auto& k : g.controls) ctl.push_back(k.qubit);
    switch (g.kind) {
      case GateKind::kX:
        if (ctl.size() <= 2) {
          out.add(g);
        } else {
          append_vchain_mcx(out, ctl, t[0], free_ancillas(circuit, g));
        }
        break;
      case GateKind::kRy:
      case GateKind::kRz:
        if (ctl.size() != 1) throw Error(ErrorCode::kUnsupportedGate, "multi-controlled rotation survived decomposition");
        append_controlled_rotation(out, g.kind, ctl[0], t[0], g.params[0]);
        break;
      case GateKind::kPhase: {
        if (ctl.size() != 1) throw Error(ErrorCode::kUnsupportedGate, "multi-controlled phase");
        const double phi = g.params[0];
        out.add(gates::phase(ctl[0], phi / 2));
        out.add(gates::cnot(ctl[0], t[0]));
        out.add(gates::phase(t[0], -phi / 2));
        out.add(gates::cnot(ctl[0], t[0]));
        out.add(gates::phase(t[0], phi / 2));
        break;
      }
      case GateKind::kZ:
        if (ctl.size() != 1) throw Error(ErrorCode::kUnsupportedGate, "multi-controlled Z");
        out.add(gates::h(t[0]));
        out.add(gates::cnot(ctl[0], t[0]));
        out.add(gates::h(t[0]));
        break;
      default:
        throw Error(ErrorCode::kUnsupportedGate, std::string("controlled ") + gate_name(g.kind));
    }
  }
  return out;
}

Circuit lower_to_native(const Circuit& circuit) {
  AncillaLayout layout;
  layout.ancillas = circuit.qubits_with_role(RegisterRole::kAncilla);
  return lower_to_native(circuit, layout);
}

std::vector<GateInstance> toffoli_target_part(QubitId c1, QubitId c2, QubitId t) {
  using gates::cnot;
  using gates::h;
  auto t_ = [](QubitId q) { return gates::single(GateKind::kT, q); };
  auto tdg = [](QubitId q) { return gates::single(GateKind::kTdg, q); };
  return {h(t), cnot(c2, t), tdg(t), cnot(c1, t), t_(t), cnot(c2, t), tdg(t), cnot(c1, t), t_(t), h(t)};
}

std::vector<GateInstance> toffoli_control_tail(QubitId c1, QubitId c2) {
  return {gates::single(GateKind::kT, c2), gates::cnot(c1, c2), gates::single(GateKind::kT, c1),
          gates::single(GateKind::kTdg, c2), gates::cnot(c1, c2)};
}

Circuit decompose_toffolis(const Circuit& circuit) {
  Circuit out = empty_like(circuit);
  for (const auto& g : circuit.gates()) {
    if (!is_toffoli(g)) {
      out.add(g);
      continue;
    }
    const QubitId c1 = g.controls[0].qubit, c2 = g.controls[1].qubit, t = g.targets[0];
    for (auto& x : toffoli_target_part(c1, c2, t)) out.add(x);
    for (auto& x : toffoli_control_tail(c1, c2)) out.add(x);
  }
  return out;
}

Circuit cancel_toffoli_pairs(const Circuit& circuit) {
  const auto& gs = circuit.gates();
  std::vector<long> partner(gs.size(), -1);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (!is_toffoli(gs[i]) || partner[i] >= 0) continue;
    const QubitId c1 = gs[i].controls[0].qubit, c2 = gs[i].controls[1].qubit;
    for (std::size_t j = i + 1; j < gs.size(); ++j) {
      if (is_toffoli(gs[j]) && partner[j] < 0 && same_gate(gs[i], gs[j])) {
        partner[i] = static_cast<long>(j);
        partner[j] = static_cast<long>(i);
        break;
      }
      // The control tail is diagonal on c1,c2; anything writing to them
      // stops it from commuting through.
      const auto& tj = gs[j].targets;
      if (std::find(tj.begin(), tj.end(), c1) != tj.end() || std::find(tj.begin(), tj.end(), c2) != tj.end()) break;
    }
  }

  Circuit out = empty_like(circuit);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = gs[i];
    if (!is_toffoli(g)) {
      out.add(g);
      continue;
    }
    if (partner[i] < 0) {
      const QubitId c1 = g.controls[0].qubit, c2 = g.controls[1].qubit;
      for (auto& x : toffoli_target_part(c1, c2, g.targets[0])) out.add(x);
      for (auto& x : toffoli_control_tail(c1, c2)) out.add(x);
      continue;
    }
    const auto& first = gs[static_cast<std::size_t>(std::min<long>(static_cast<long>(i), partner[i]))];
    auto part = toffoli_target_part(first.controls[0].qubit, first.controls[1].qubit, first.targets[0]);
    if (static_cast<long>(i) < partner[i]) {
      for (auto& x : part) out.add(x);
    } else {
      for (auto it = part.rbegin(); it != part.rend(); ++it) out.add(it->inverse());
    }
  }
  return cancel_adjacent_inverses(out);
}

Circuit cancel_adjacent_inverses(const Circuit& circuit) {
  std::vector<GateInstance> gs = circuit.gates();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<bool> dead(gs.size(), false);
    for (std::size_t i = 0; i < gs.size(); ++i) {
      if (dead[i]) continue;
      for (std::size_t j = i + 1; j < gs.size(); ++j) {
        if (dead[j] || !shares_qubit(gs[i], gs[j])) continue;
        std::vector<QubitId> qi = gs[i].qubits(), qj = gs[j].qubits();
        std::sort(qi.begin(), qi.end());
        std::sort(qj.begin(), qj.end());
        if (qi == qj && same_gate(gs[i].inverse(), gs[j])) {
          dead[i] = dead[j] = true;
          changed = true;
        }
        break;
      }
    }
    std::vector<GateInstance> next;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      if (!dead[i]) next.push_back(gs[i]);
    }
    gs.swap(next);
  }
  Circuit out = empty_like(circuit);
  for (auto& g : gs) out.add(std::move(g));
  return out;
}

namespace {

const char* register_name(RegisterRole role) {
  switch (role) {
    case RegisterRole::kSystem: return "q";
    case RegisterRole::kAncilla: return "qa";
    case RegisterRole::kReadout: return "qr";
  }
  return "q";
}

std::string format_angle(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string export_qasm(const Circuit& circuit) {
  const RegisterRole roles[] = {RegisterRole::kSystem, RegisterRole::kAncilla, RegisterRole::kReadout};
  std::map<QubitId, std::string> names;
  std::ostringstream os;
  os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  for (RegisterRole r : roles) {
    const auto qs = circuit.qubits_with_role(r);
    if (qs.empty()) continue;
    os << "qreg " << register_name(r) << "[" << qs.size() << "];\n";
    for (std::size_t i = 0; i < qs.size(); ++i) names[qs[i]] = std::string(register_name(r)) + "[" + std::to_string(i) + "]";
  }
  for (const auto& g : circuit.gates()) {
    for (const auto& k : g.controls) {
      if (!k.on_one) throw Error(ErrorCode::kUnsupportedGate, "open control in export; lower first");
    }
    std::string name;
    if (g.controls.empty()) {
      if (g.kind == GateKind::kSwap || g.kind == GateKind::kI) {
        throw Error(ErrorCode::kUnsupportedGate, std::string(gate_name(g.kind)) + " is not in the export set");
      }
      name = gate_name(g.kind);
    } else if (g.kind == GateKind::kX && g.controls.size() == 1) {
      name = "cx";
    } else if (g.kind == GateKind::kX && g.controls.size() == 2) {
      name = "ccx";
    } else {
      throw Error(ErrorCode::kUnsupportedGate, "controlled " + std::string(gate_name(g.kind)) + "; lower first");
    }
    os << name;
    if (!g.params.empty()) os << "(" << format_angle(g.params[0]) << ")";
    const auto qs = g.qubits();
    for (std::size_t i = 0; i < qs.size(); ++i) os << (i ? "," : " ") << names.at(qs[i]);
    os << ";\n";
  }
  return os.str();
}

Circuit parse_qasm(const std::string& text) {
  static const std::map<std::string, GateKind> kinds = {
      {"x", GateKind::kX},   {"y", GateKind::kY},     {"z", GateKind::kZ},   {"h", GateKind::kH},
      {"s", GateKind::kS},   {"sdg", GateKind::kSdg}, {"t", GateKind::kT},   {"tdg", GateKind::kTdg},
      {"ry", GateKind::kRy}, {"rz", GateKind::kRz},   {"u1", GateKind::kPhase}};
  static const std::regex qreg_re(R"(^qreg\s+(\w+)\[(\d+)\];$)");
  static const std::regex gate_re(R"(^(\w+)(?:\(([^)]*)\))?\s+([^;]+);$)");
  static const std::regex arg_re(R"(^\s*(\w+)\[(\d+)\]\s*$)");

  struct Reg {
    QubitId offset;
    std::size_t size;
    RegisterRole role;
  };
  std::map<std::string, Reg> regs;
  std::size_t width = 0;
  std::vector<std::pair<GateInstance, std::size_t>> pending;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "OPENQASM 2.0;") {
      header = true;
      continue;
    }
    if (line.rfind("include", 0) == 0) continue;
    std::smatch m;
    if (std::regex_match(line, m, qreg_re)) {
      const std::string name = m[1];
      const RegisterRole role = name == "qa" ? RegisterRole::kAncilla
                                : name == "qr" ? RegisterRole::kReadout
                                               : RegisterRole::kSystem;
      const std::size_t size = std::stoul(m[2]);
      regs[name] = {width, size, role};
      width += size;
      continue;
    }
    if (!std::regex_match(line, m, gate_re)) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": " + line);
    }
    const std::string name = m[1];
    std::vector<QubitId> args;
    std::stringstream as(m[3].str());
    std::string a;
    while (std::getline(as, a, ',')) {
      std::smatch am;
      if (!std::regex_match(a, am, arg_re) || !regs.count(am[1])) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": bad argument '" + a + "'");
      }
      const Reg& r = regs.at(am[1]);
      const std::size_t idx = std::stoul(am[2]);
      if (idx >= r.size) throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": index out of range");
      args.push_back(r.offset + idx);
    }
    GateInstance g;
    if (name == "cx" || name == "ccx") {
      if (args.size() != (name == "cx" ? 2u : 3u)) throw Error(ErrorCode::kParse, "wrong arity for " + name);
      g.kind = GateKind::kX;
      g.targets = {args.back()};
      for (std::size_t i = 0; i + 1 < args.size(); ++i) g.controls.push_back({args[i], true});
    } else if (kinds.count(name)) {
      if (args.size() != 1) throw Error(ErrorCode::kParse, "wrong arity for " + name);
      g.kind = kinds.at(name);
      g.targets = args;
      if (m[2].matched) g.params = {std::stod(m[2].str())};
    } else {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": unknown gate " + name);
    }
    pending.emplace_back(std::move(g), lineno);
  }
  if (!header) throw Error(ErrorCode::kParse, "missing OPENQASM 2.0 header");
  if (width == 0) throw Error(ErrorCode::kParse, "no registers declared");
  Circuit c(width);
  for (const auto& [name, r] : regs) {
    for (std::size_t i = 0; i < r.size; ++i) c.set_role(r.offset + i, r.role);
  }
  for (auto& [g, ln] : pending) {
    try {
      c.add(std::move(g));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(ln) + ": " + e.what());
    }
  }
  return c;
}

std::vector<UePart> u_e_parts(const UePlan& plan, const RegisterLayout& layout) {
  std::vector<std::vector<UeGate>> buckets(4);
  for (const auto& g : plan.gates) buckets[std::min<std::size_t>(g.stage <= 1 ? 0 : g.stage - 1, 3)].push_back(g);
  std::vector<UePart> parts;
  for (std::size_t p = 0; p < buckets.size(); ++p) {
    UePlan sub;
    sub.gates = buckets[p];
    Circuit c = layout.make_circuit();
    for (std::size_t i = 0; i < layout.system; ++i) c.add(gates::h(layout.sys(i)));
    c.append(build_u_e(sub, layout));
    const Circuit lowered = lower_to_native(c, layout.mcry_layout());
    parts.push_back({"part" + std::to_string(p + 1), c, decompose_toffolis(lowered), cancel_toffoli_pairs(lowered)});
  }
  return parts;
}

std::vector<double> ideal_distribution(const Circuit& circuit, const std::vector<QubitId>& measured) {
  StateVector s(circuit.num_qubits());
  apply_circuit(s, circuit);
  return marginal_probabilities(s, measured);
}

std::vector<double> noisy_distribution(const Circuit& circuit, const std::vector<QubitId>& measured,
                                       const NoiseParams& noise, std::size_t trajectories, std::uint64_t seed) {
  noise.validate();
  if (trajectories < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one trajectory");
  // Cache ideal prefix states so each trajectory restarts at its first error.
  const auto& gs = circuit.gates();
  std::vector<StateVector> prefix;
  prefix.reserve(gs.size() + 1);
  prefix.emplace_back(circuit.num_qubits());
  for (const auto& g : gs) {
    prefix.push_back(prefix.back());
    apply_gate(prefix.back(), g);
  }
  const auto ideal = marginal_probabilities(prefix.back(), measured);

  static constexpr GateKind kPaulis[] = {GateKind::kX, GateKind::kY, GateKind::kZ};
  Rng rng(seed);
  std::vector<double> acc(ideal.size(), 0.0);
  for (std::size_t tr = 0; tr < trajectories; ++tr) {
    std::optional<StateVector> s;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const auto& g = gs[i];
      if (s) apply_gate(*s, g);
      const double p = g.arity() >= 2 ? noise.depolarizing_2q : noise.depolarizing_1q;
      for (QubitId q : g.qubits()) {
        if (uniform01(rng) < p) {
          if (!s) s = prefix[i + 1];
          const auto which = std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng) * 3.0), 2);
          apply_matrix(*s, matrix_of(kPaulis[which], {}), q);
        }
      }
    }
    const auto dist = s ? marginal_probabilities(*s, measured) : ideal;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += dist[k];
  }
  for (auto& v : acc) v /= static_cast<double>(trajectories);
  return apply_readout_noise(acc, measured.size(), noise.readout_flip);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::kInvalidArgument, "distribution sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d / 2.0;
}

}  // namespace qpt
