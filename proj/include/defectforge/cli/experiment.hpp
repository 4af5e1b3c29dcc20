// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "defectforge/augment/augment.hpp"
#include "defectforge/datakit/dataset.hpp"
#include "defectforge/datakit/micro.hpp"
#include "defectforge/detectkit/detector.hpp"
#include "defectforge/gpwgan/train.hpp"

namespace defectforge::cli {

// Minority-class experiment: keep m_r minority training images, optionally
// append m_g synthetic ones, train the toy detector, score the test fold.
struct ExperimentConfig {
  std::string minority = "scratch";
  std::size_t folds = 3;
  /// Context kept around real boxes when building GAN training patches.
  int gan_pad = 2;
  /// patch_w / patch_h of 0 are replaced by the mean landscape size of the
  /// padded minority boxes.
  gpwgan::GanConfig gan = default_gan();
  detectkit::ToyDetectorConfig detector;
  /// m_g, seed and class_mix are set per run.
  augment::AugmentSpec augment;

  static gpwgan::GanConfig default_gan();
};

struct ExperimentData {
  datakit::Dataset dataset;
  std::vector<augment::ImageBed> beds;
};

struct FoldOutcome {
  double ap = 0.0;
  std::size_t train_images = 0;
  std::size_t synthetic_images = 0;
};

/// One fold of one (m_r, m_g) cell. Throws DropTooLarge when the fold has
/// fewer than m_r minority training images.
FoldOutcome run_minority_fold(const ExperimentData& data, const ExperimentConfig& config,
                              std::size_t m_r, std::size_t m_g, std::size_t fold,
                              std::uint64_t seed);

/// Micro dataset plus `beds` defect-free beds from the same background.
ExperimentData make_micro_experiment(const datakit::MicroConfig& micro, std::size_t beds,
                                     std::uint64_t seed);

}  // namespace defectforge::cli
