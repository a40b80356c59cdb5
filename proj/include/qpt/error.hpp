// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qpt Authors

#pragma once

#include <stdexcept>
#include <string>

namespace qpt {

enum class ErrorCode {
  kSizeOutOfRange,
  kNonUnitary,
  kIndexCollision,
  kInvalidQubit,
  kZeroNormBranch,
  kInsufficientAncilla,
  kDegenerateSplit,
  kDegenerateTarget,
  kConstantTooLarge,
  kPostselectionFailure,
  kRusExhausted,
  kRankDeficient,
  kUnsupportedGate,
  kUnmappedQubit,
  kInvalidArgument,
  kParse,
  kConfig,
};

const char* to_string(ErrorCode code);

// All library failures are thrown as this type; `code()` tells callers
// which contract was broken so the CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qpt
