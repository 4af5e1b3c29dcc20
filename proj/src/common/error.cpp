// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/common/error.hpp"

namespace defectforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonFiniteResult: return "NonFiniteResult";
    case ErrorKind::kNotOnTape: return "NotOnTape";
    case ErrorKind::kNotScalarOutput: return "NotScalarOutput";
    case ErrorKind::kNameMismatch: return "NameMismatch";
    case ErrorKind::kDeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::kDomainError: return "DomainError";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kConfigInvalid: return "ConfigInvalid";
    case ErrorKind::kBoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorKind::kPatchTooLarge: return "PatchTooLarge";
    case ErrorKind::kAllocationFailed: return "AllocationFailed";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kDropTooLarge: return "DropTooLarge";
    case ErrorKind::kTooFewImages: return "TooFewImages";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kNoGroundTruth: return "NoGroundTruth";
    case ErrorKind::kEmptyClassSet: return "EmptyClassSet";
    case ErrorKind::kInvalidBox: return "InvalidBox";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace defectforge
