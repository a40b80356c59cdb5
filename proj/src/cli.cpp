// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include "qpt/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qpt/circuit_opt.hpp"
#include "qpt/error.hpp"

namespace qpt::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

VMode parse_mode(const std::string& s) {
  if (s == "plain" || s == "plain_exp") return VMode::kPlainExp;
  if (s == "difference") return VMode::kDifference;
  config_error("v_mode must be plain or difference, got '" + s + "'");
}

ReadoutMode parse_readout(const std::string& s) {
  if (s == "exact" || s == "exact_amplitude") return ReadoutMode::kExactAmplitude;
  if (s == "shots") return ReadoutMode::kShots;
  config_error("readout_mode must be exact or shots, got '" + s + "'");
}

PTCircuitConfig circuit_config(const RunConfig& cfg, double lambda, std::size_t point) {
  PTCircuitConfig c;
  c.k = cfg.k;
  c.lambda = lambda;
  c.C = cfg.C;
  c.v_mode = cfg.v_mode;
  c.readout_mode = cfg.readout_mode;
  c.shots = cfg.shots;
  if (cfg.seed) c.seed = *cfg.seed + point;
  return c;
}

}  // namespace

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (lambdas.empty()) config_error("lambda grid is empty");
  for (double l : lambdas) {
    if (!std::isfinite(l) || l <= 0.0) config_error("lambda values must be positive");
  }
  if (k >= kSystemDim) config_error("k must be < 16");
  if (shots < 1) config_error("shots must be >= 1");
  if (readout_mode == ReadoutMode::kShots && !seed) config_error("shots mode requires a seed");
  if (trajectories < 1) config_error("trajectories must be >= 1");
  if (circuit != "psi1" && circuit != "u_e" && circuit != "u_e_optimized" && circuit != "u_dis") {
    config_error("circuit must be one of psi1, u_e, u_e_optimized, u_dis");
  }
  try {
    noise_params.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> known = {"t",      "U",           "W",           "lambdas", "lambda",
                                              "k",      "C",           "v_mode",      "readout_mode",
                                              "shots",  "seed",        "noise",       "noise_params",
                                              "trajectories", "circuit", "output"};
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) config_error("unknown config key '" + key + "'");
    }
    if (j.contains("t")) cfg.params.t = j["t"].get<double>();
    if (j.contains("U")) cfg.params.U = j["U"].get<double>();
    if (j.contains("W")) cfg.params.W = j["W"].get<double>();
    if (j.contains("lambdas")) cfg.lambdas = j["lambdas"].get<std::vector<double>>();
    if (j.contains("lambda")) cfg.lambdas = {j["lambda"].get<double>()};
    if (j.contains("k")) cfg.k = j["k"].get<BasisIndex>();
    if (j.contains("C") && !(j["C"].is_string() && j["C"] == "default")) cfg.C = j["C"].get<double>();
    if (j.contains("v_mode")) cfg.v_mode = parse_mode(j["v_mode"].get<std::string>());
    if (j.contains("readout_mode")) cfg.readout_mode = parse_readout(j["readout_mode"].get<std::string>());
    if (j.contains("shots")) cfg.shots = j["shots"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("noise")) cfg.noise = j["noise"].get<bool>();
    if (j.contains("noise_params")) {
      const auto& n = j["noise_params"];
      for (const auto& [key, value] : n.items()) {
        if (key != "depolarizing_1q" && key != "depolarizing_2q" && key != "readout_flip") {
          config_error("unknown noise_params key '" + key + "'");
        }
      }
      if (n.contains("depolarizing_1q")) cfg.noise_params.depolarizing_1q = n["depolarizing_1q"].get<double>();
      if (n.contains("depolarizing_2q")) cfg.noise_params.depolarizing_2q = n["depolarizing_2q"].get<double>();
      if (n.contains("readout_flip")) cfg.noise_params.readout_flip = n["readout_flip"].get<double>();
    }
    if (j.contains("trajectories")) cfg.trajectories = j["trajectories"].get<std::size_t>();
    if (j.contains("circuit")) cfg.circuit = j["circuit"].get<std::string>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  } catch (const json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

std::string cmd_sweep(const RunConfig& cfg) {
  cfg.validate();
  std::vector<double> grid = cfg.lambdas;
  std::sort(grid.begin(), grid.end());
  const PtPipeline pipe(cfg.params, cfg.k, cfg.C);
  const PTReference ref = pt_corrections(pipe.spectrum(), unit_perturbation(), cfg.k);
  const auto exact = exact_eigen_sweep(cfg.params, grid);
  const double e_gs = pipe.spectrum().levels.front().energy;

  std::size_t dom = 0;
  for (std::size_t m = 0; m < ref.psi1.size(); ++m) {
    if (std::abs(ref.psi1[m]) > std::abs(ref.psi1[dom])) dom = m;
  }
  double ref_norm = 0.0;
  for (const auto& c : ref.psi1) ref_norm += std::norm(c);
  ref_norm = std::sqrt(ref_norm);

  std::ostringstream os;
  os << "lambda,exact_delta_e,oracle_first_order,oracle_second_order,est_first_order,est_second_order,"
        "e1_est,e1_oracle,e1_rel_err,e2_est,e2_oracle,e2_rel_err,psi1_index,psi1_oracle,psi1_est_re,"
        "psi1_est_im,psi1_rel_err,success_prob,rus_attempts\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = grid[i];
    const EstimateRecord r = pipe.run(circuit_config(cfg, l, i));
    double diff = 0.0;
    for (std::size_t m = 0; m < ref.psi1.size(); ++m) diff += std::norm(r.psi1_est[m] - ref.psi1[m]);
    os << num(l) << ',' << num(exact[i].ground_energy - e_gs) << ',' << num(l * ref.E1) << ','
       << num(l * ref.E1 + l * l * ref.E2) << ',' << num(l * r.e1_est) << ',' << num(l * r.e1_est + l * l * r.e2_est)
       << ',' << num(r.e1_est) << ',' << num(ref.E1) << ',' << num(std::abs(r.e1_est - ref.E1) / std::abs(ref.E1))
       << ',' << num(r.e2_est) << ',' << num(ref.E2) << ',' << num(std::abs(r.e2_est - ref.E2) / std::abs(ref.E2))
       << ',' << bitstring(dom, kSystemQubits) << ',' << num(ref.psi1[dom].real()) << ','
       << num(r.psi1_est[dom].real()) << ',' << num(r.psi1_est[dom].imag()) << ','
       << num(std::sqrt(diff) / ref_norm) << ',' << num(r.success_prob) << ',' << r.rus_attempts << '\n';
  }
  return os.str();
}

std::string cmd_calibrate(const RunConfig& cfg) {
  cfg.validate();
  const PtPipeline pipe(cfg.params, cfg.k, cfg.C);
  const auto rows = calibrate_u_e(pipe.u_e(), pipe.spectrum(), cfg.k, pipe.constant(), cfg.readout_mode, cfg.shots,
                                  cfg.seed.value_or(0), pipe.layout());
  std::ostringstream os;
  os << "level,energy,energy_difference,degeneracy,measured_16p,predicted_16p,sigma_16p,abs_error\n";
  for (const auto& r : rows) {
    os << r.level << ',' << num(r.energy) << ',' << num(r.energy_difference) << ',' << r.degeneracy << ','
       << num(r.measured) << ',' << num(r.predicted) << ',' << num(r.sigma) << ','
       << num(std::abs(r.measured - r.predicted)) << '\n';
  }
  return os.str();
}

namespace {

json pt_json(const PTReference& ref) {
  json psi = json::array();
  for (const auto& c : ref.psi1) psi.push_back({c.real(), c.imag()});
  return {{"k", bitstring(ref.k, kSystemQubits)}, {"E0", ref.E0}, {"E1", ref.E1}, {"E2", ref.E2}, {"psi1", psi}};
}

}  // namespace

std::string cmd_oracle(const RunConfig& cfg) {
  cfg.validate();
  const SpectrumTable spec = make_spectrum_table(cfg.params);
  json levels = json::array();
  for (const auto& l : spec.levels) {
    json members = json::array();
    for (BasisIndex m : l.members) members.push_back(bitstring(m, kSystemQubits));
    levels.push_back({{"energy", l.energy}, {"degeneracy", l.degeneracy()}, {"members", members}});
  }
  json out;
  out["params"] = {{"t", cfg.params.t}, {"U", cfg.params.U}, {"W", cfg.params.W}, {"lambda", cfg.params.lambda()}};
  out["levels"] = levels;
  out["E_gs"] = spec.levels.front().energy;
  out["E_h"] = spec.levels.back().energy;
  // W * n1 n2 as given, and the per-lambda operator 4 n1 n2.
  out["pt"] = pt_json(pt_corrections(spec, build_v(cfg.params), cfg.k));
  out["pt_per_lambda"] = pt_json(pt_corrections(spec, unit_perturbation(), cfg.k));
  out["circuit_energy_offset"] = circuit_energy_offset(spec, cfg.k);
  out["C"] = cfg.C ? *cfg.C : default_constant(spec, cfg.k);
  return out.dump(2) + "\n";
}

namespace {

double circuit_lambda(const RunConfig& cfg) { return cfg.lambdas.size() == 1 ? cfg.lambdas.front() : 0.1; }

Circuit selected_circuit(const RunConfig& cfg, const PtPipeline& pipe, bool lowered) {
  const auto& layout = pipe.layout();
  if (cfg.circuit == "psi1") {
    const Circuit c = pipe.psi1_circuit(circuit_config(cfg, circuit_lambda(cfg), 0));
    return lowered ? lower_to_native(c, layout.mcry_layout()) : decompose_multicontrolled(c, layout.mcry_layout());
  }
  if (cfg.circuit == "u_dis") {
    Circuit c = layout.make_circuit();
    c.append(pipe.u_dis());
    return lowered ? lower_to_native(c, layout.mcry_layout()) : decompose_multicontrolled(c, layout.mcry_layout());
  }
  const Circuit native = lower_to_native(pipe.u_e(), layout.mcry_layout());
  if (cfg.circuit == "u_e_optimized") return cancel_toffoli_pairs(native);
  return lowered ? native : decompose_multicontrolled(pipe.u_e(), layout.mcry_layout());
}

}  // namespace

std::string cmd_export(const RunConfig& cfg) {
  cfg.validate();
  const PtPipeline pipe(cfg.params, cfg.k, cfg.C);
  return export_qasm(selected_circuit(cfg, pipe, true));
}

std::string cmd_census(const RunConfig& cfg) {
  cfg.validate();
  const PtPipeline pipe(cfg.params, cfg.k, cfg.C);
  const GateCensus mid = gate_census(selected_circuit(cfg, pipe, false));
  const GateCensus native = gate_census(selected_circuit(cfg, pipe, true));
  struct Row {
    const char* category;
    std::size_t count;
    long lo, hi;
  };
  const bool banded = cfg.circuit == "psi1";
  const Row rows[] = {{"one_qubit", mid.one_qubit, 57, -1}, {"two_qubit", mid.two_qubit, 35, 65},
                      {"toffoli", mid.toffoli, 27, 49},     {"cccnot", mid.cccnot, 8, 16},
                      {"other", mid.other, -1, -1}};
  std::ostringstream os;
  os << "stage,category,count,band_low,band_high,in_band\n";
  for (const auto& r : rows) {
    os << "decomposed," << r.category << ',' << r.count << ',';
    if (!banded || r.lo < 0) {
      os << ",,\n";
      continue;
    }
    const bool ok = static_cast<long>(r.count) >= r.lo && (r.hi < 0 || static_cast<long>(r.count) <= r.hi);
    os << r.lo << ',' << (r.hi < 0 ? std::string() : std::to_string(r.hi)) << ',' << (ok ? 1 : 0) << '\n';
  }
  const std::pair<const char*, std::size_t> nat[] = {{"one_qubit", native.one_qubit},
                                                     {"two_qubit", native.two_qubit},
                                                     {"toffoli", native.toffoli},
                                                     {"cccnot", native.cccnot},
                                                     {"other", native.other}};
  for (const auto& [name, count] : nat) os << "native," << name << ',' << count << ",,,\n";
  return os.str();
}

std::string cmd_noise(const RunConfig& cfg) {
  cfg.validate();
  const PtPipeline pipe(cfg.params, cfg.k, cfg.C);
  const RegisterLayout small{kSystemQubits, 2, 1};
  const auto parts = u_e_parts(pipe.u_e_plan(), small);
  std::vector<QubitId> measured;
  for (std::size_t i = 0; i < small.system; ++i) measured.push_back(small.sys(i));
  measured.push_back(small.denominator());
  const NoiseParams noise = cfg.noise ? cfg.noise_params : NoiseParams::none();
  const std::uint64_t seed = cfg.seed.value_or(0);

  std::ostringstream os;
  os << "part,variant,outcome,probability,tv_to_ideal\n";
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto ideal = ideal_distribution(parts[p].optimized, measured);
    const std::pair<const char*, const Circuit*> variants[] = {{"naive", &parts[p].naive},
                                                               {"optimized", &parts[p].optimized}};
    auto emit = [&](const char* name, const std::vector<double>& d) {
      const double tv = total_variation(d, ideal);
      for (std::size_t o = 0; o < d.size(); ++o) {
        os << parts[p].name << ',' << name << ',' << bitstring(o, measured.size()) << ',' << num(d[o]) << ','
           << num(tv) << '\n';
      }
    };
    emit("ideal", ideal);
    for (std::size_t v = 0; v < 2; ++v) {
      emit(variants[v].first,
           noisy_distribution(*variants[v].second, measured, noise, cfg.trajectories, seed + 2 * p + v));
    }
  }
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum perturbation-theory circuits for the two-site Hubbard model"};
  app.require_subcommand(1);
  std::string config_path, mode, readout, output, circuit;
  std::vector<double> lambdas;
  double t = 0, U = 0, W = 0, C = 0;
  std::size_t k = 0, shots = 0, trajectories = 0;
  std::uint64_t seed = 0;
  bool noise_on = false, noise_off = false;

  const char* verbs[] = {"sweep", "calibrate", "oracle", "export-qasm", "census", "noise-run"};
  const char* help[] = {"lambda sweep of all estimators (CSV)", "U_e calibration table (CSV)",
                        "spectrum and reference corrections (JSON)", "OpenQASM 2.0 of a lowered circuit",
                        "gate counts with tolerance bands (CSV)", "naive vs optimized noisy histograms (CSV)"};
  std::map<std::string, CLI::App*> subs;
  for (std::size_t i = 0; i < 6; ++i) {
    CLI::App* s = app.add_subcommand(verbs[i], help[i]);
    s->add_option("-c,--config", config_path, "JSON config file");
    s->add_option("-o,--output", output, "write result here instead of stdout");
    s->add_option("--t", t, "hopping energy");
    s->add_option("--U", U, "on-site energy");
    s->add_option("--W", W, "inter-site interaction");
    s->add_option("--lambda", lambdas, "lambda grid")->delimiter(',');
    s->add_option("--k", k, "target label");
    s->add_option("--C", C, "denominator scale constant");
    s->add_option("--mode", mode, "plain or difference");
    s->add_option("--readout", readout, "exact or shots");
    s->add_option("--shots", shots, "shot count");
    s->add_option("--seed", seed, "RNG seed (required with shots)");
    s->add_flag("--noise", noise_on, "enable the noise model");
    s->add_flag("--no-noise", noise_off, "disable the noise model");
    s->add_option("--trajectories", trajectories, "noise trajectories per circuit");
    s->add_option("--circuit", circuit, "psi1, u_e, u_e_optimized or u_dis");
    subs[verbs[i]] = s;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) config_error("cannot read config file " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = config_from_json(ss.str());
    }
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--t")) cfg.params.t = t;
    if (given("--U")) cfg.params.U = U;
    if (given("--W")) cfg.params.W = W;
    if (given("--lambda")) cfg.lambdas = lambdas;
    if (given("--k")) cfg.k = k;
    if (given("--C")) cfg.C = C;
    if (given("--mode")) cfg.v_mode = parse_mode(mode);
    if (given("--readout")) cfg.readout_mode = parse_readout(readout);
    if (given("--shots")) cfg.shots = shots;
    if (given("--seed")) cfg.seed = seed;
    if (noise_on) cfg.noise = true;
    if (noise_off) cfg.noise = false;
    if (given("--trajectories")) cfg.trajectories = trajectories;
    if (given("--circuit")) cfg.circuit = circuit;
    if (given("--output")) cfg.output = output;

    const std::string verb = sub->get_name();
    std::string text;
    if (verb == "sweep") text = cmd_sweep(cfg);
    else if (verb == "calibrate") text = cmd_calibrate(cfg);
    else if (verb == "oracle") text = cmd_oracle(cfg);
    else if (verb == "export-qasm") text = cmd_export(cfg);
    else if (verb == "census") text = cmd_census(cfg);
    else text = cmd_noise(cfg);

    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!f) config_error("cannot write " + cfg.output);
      f << text;
    }
    return kOk;
  } catch (const Error& e) {
    err << e.what() << '\n';
    const ErrorCode c = e.code();
    return (c == ErrorCode::kConfig || c == ErrorCode::kInvalidArgument || c == ErrorCode::kParse) ? kConfigError
                                                                                                  : kNumericalError;
  }
}

}  // namespace qpt::cli
