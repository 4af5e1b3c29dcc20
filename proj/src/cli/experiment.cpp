// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/cli/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"
#include "defectforge/evalkit/metrics.hpp"

namespace defectforge::cli {

gpwgan::GanConfig ExperimentConfig::default_gan() {
  gpwgan::GanConfig g;
  g.batch_size = 32;
  g.adam_alpha = 5e-4;
  g.adam_beta1 = 0.5;
  g.z_dim = 16;
  g.patch_w = 0;
  g.patch_h = 0;
  g.iterations = 1500;
  g.generator_hidden = {64, 64};
  g.critic_hidden = {64, 64};
  return g;
}

FoldOutcome run_minority_fold(const ExperimentData& data, const ExperimentConfig& config,
                              std::size_t m_r, std::size_t m_g, std::size_t fold,
                              std::uint64_t seed) {
  const auto folds = datakit::kfold_split(data.dataset, config.folds,
                                          derive_seed(seed, "experiment.split"));
  if (fold >= folds.size())
    fail(ErrorKind::kConfigInvalid, "fold " + std::to_string(fold) + " out of range");
  const auto& split = folds[fold];
  const std::size_t have = split.train.image_counts().at(config.minority);
  if (m_r > have)
    fail(ErrorKind::kDropTooLarge, "fold " + std::to_string(fold) + " has only " +
                                       std::to_string(have) + " '" + config.minority +
                                       "' training images, m_r = " + std::to_string(m_r));
  datakit::Dataset train = datakit::make_imbalanced(split.train, config.minority, have - m_r,
                                                    derive_seed(seed, "experiment.drop"));

  if (m_g > 0) {
    if (m_r == 0)
      fail(ErrorKind::kEmptyDataset, "augmentation needs at least one real minority image");
    gpwgan::GanConfig gan = config.gan;
    gan.class_label = config.minority;
    gan.seed = derive_seed(seed, "experiment.gan");
    // Mean landscape size of the padded minority boxes.
    std::size_t portrait = 0, boxes = 0;
    double sum_w = 0.0, sum_h = 0.0;
    for (const auto& img : train.images)
      for (const auto& a : img.annotations) {
        if (a.class_label != config.minority) continue;
        ++boxes;
        if (a.box.h > a.box.w) ++portrait;
        sum_w += std::max(a.box.w, a.box.h) + 2 * config.gan_pad;
        sum_h += std::min(a.box.w, a.box.h) + 2 * config.gan_pad;
      }
    if (gan.patch_w == 0) gan.patch_w = static_cast<int>(std::lround(sum_w / boxes));
    if (gan.patch_h == 0) gan.patch_h = static_cast<int>(std::lround(sum_h / boxes));
    const auto patches = augment::gan_training_patches(train, config.minority, config.gan_pad,
                                                       gan.patch_w, gan.patch_h);
    auto trained = gpwgan::train_gpwgan(gan, std::span<const imaging::DefectPatch>(patches));

    std::map<std::string, augment::ClassGenerator> generators;
    generators[config.minority] = {std::move(trained.generator),
                                   static_cast<double>(portrait) / static_cast<double>(boxes)};
    augment::AugmentSpec spec = config.augment;
    spec.m_g = m_g;
    spec.seed = derive_seed(seed, "experiment.augment");
    spec.class_mix = {{config.minority, 1.0}};
    train = augment::build_augmented_dataset(train, data.beds, generators, spec);
  }

  detectkit::ToyDetectorConfig det = config.detector;
  det.seed = derive_seed(seed, "experiment.detector");
  const auto model = detectkit::train_toy_detector(train, det);
  const auto report = evalkit::evaluate(split.test, detectkit::detect_all(model, split.test));
  const auto* cls = report.find(config.minority);
  FoldOutcome out;
  out.ap = cls != nullptr && cls->ap ? *cls->ap : 0.0;
  out.train_images = train.images.size();
  out.synthetic_images = m_g;
  return out;
}

ExperimentData make_micro_experiment(const datakit::MicroConfig& micro, std::size_t beds,
                                     std::uint64_t seed) {
  ExperimentData data;
  data.dataset = datakit::make_micro_dataset(micro, seed);
  const auto images = datakit::make_micro_beds(micro, beds, seed);
  for (std::size_t i = 0; i < images.size(); ++i)
    data.beds.push_back({images[i], "bed" + std::to_string(i)});
  return data;
}

}  // namespace defectforge::cli
