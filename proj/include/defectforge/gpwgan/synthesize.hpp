// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "defectforge/gpwgan/train.hpp"
#include "defectforge/imaging/image.hpp"

namespace defectforge::gpwgan {

struct Postprocess {
  /// Clamp raw generator output to [0, 1]. Always applied before rescaling.
  bool clamp = true;
  /// Optional per-patch min-max stretch of intensities onto [lo, hi].
  std::optional<std::pair<double, double>> rescale;
};

/// Draws `count` patches from the generator. Each carries the generator's
/// class label, origin kGenerated and a feathered Otsu mask. Output is a
/// pure function of (generator, count, seed, postprocess).
std::vector<imaging::DefectPatch> synthesize_patches(const GeneratorNet& gen,
                                                     std::size_t count,
                                                     std::uint64_t seed,
                                                     const Postprocess& post = {});

/// Model file: magic "DFGM", u32 descriptor length, JSON architecture
/// descriptor, then the NDG1 parameter container.
void save_generator(const std::filesystem::path& path, const GeneratorNet& gen);
GeneratorNet load_generator(const std::filesystem::path& path);

}  // namespace defectforge::gpwgan
