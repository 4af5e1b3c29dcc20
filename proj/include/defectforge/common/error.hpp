// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace defectforge {

enum class ErrorKind {
  kShapeMismatch,
  kNonFiniteResult,
  kNotOnTape,
  kNotScalarOutput,
  kNameMismatch,
  kDeltaOutOfRange,
  kDomainError,
  kEmptyDataset,
  kConfigInvalid,
  kBoxOutOfBounds,
  kPatchTooLarge,
  kAllocationFailed,
  kEmptyMask,
  kDropTooLarge,
  kTooFewImages,
  kParseError,
  kNoGroundTruth,
  kEmptyClassSet,
  kInvalidBox,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; the kind is the
// stable, machine-readable part and the message carries context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace defectforge
