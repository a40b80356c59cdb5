// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpt/hubbard.hpp"
#include "qpt/pt_circuits.hpp"
#include "qpt/statevector.hpp"

namespace qpt::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3 };

struct RunConfig {
  HubbardParams params;
  std::vector<double> lambdas{0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3};
  BasisIndex k = 0;
  std::optional<double> C;
  VMode v_mode = VMode::kPlainExp;
  ReadoutMode readout_mode = ReadoutMode::kExactAmplitude;
  std::size_t shots = 32000;
  std::optional<std::uint64_t> seed;
  bool noise = true;
  NoiseParams noise_params;
  std::size_t trajectories = 4000;
  std::string circuit = "psi1";  // export/census target: psi1, u_e, u_e_optimized, u_dis
  std::string output;            // empty: stdout

  // Throws Error(kConfig) on any invalid field.
  void validate() const;
};

// Parses the JSON config document; unknown keys are rejected.
RunConfig config_from_json(const std::string& text);

std::string cmd_sweep(const RunConfig& cfg);
std::string cmd_calibrate(const RunConfig& cfg);
std::string cmd_oracle(const RunConfig& cfg);
std::string cmd_export(const RunConfig& cfg);
std::string cmd_census(const RunConfig& cfg);
std::string cmd_noise(const RunConfig& cfg);

// Whole command line (without argv[0]); returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpt::cli
