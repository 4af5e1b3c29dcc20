// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "defectforge/datakit/dataset.hpp"

namespace defectforge::datakit {

// Small synthetic inspection dataset: noisy textured beds carrying one
// defect each from three shape classes.
//   scratch:   thin dark bar, horizontal or vertical
//   inclusion: dark filled disc
//   patch:     bright square blotch
struct MicroConfig {
  int image_size = 48;
  std::size_t images_per_class = 60;
  double noise_sigma = 0.03;
  std::vector<std::string> classes{"scratch", "inclusion", "patch"};
};

Dataset make_micro_dataset(const MicroConfig& config, std::uint64_t seed);

/// Defect-free beds drawn from the same background model.
std::vector<imaging::GrayImage> make_micro_beds(const MicroConfig& config,
                                                std::size_t count,
                                                std::uint64_t seed);

}  // namespace defectforge::datakit
