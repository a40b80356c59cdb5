// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#include <iostream>
#include <string>
#include <vector>

#include "qpt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qpt::cli::run(args, std::cout, std::cerr);
}
