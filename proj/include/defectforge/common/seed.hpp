// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace defectforge {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a. Stable across platforms, used for seed labels and config
/// hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derives an independent stream seed from a root seed, a component label
/// and an index, so that every consumer of randomness is addressable by name.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view label,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(root, label, index));
}

}  // namespace defectforge
