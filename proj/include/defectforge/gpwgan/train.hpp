// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "defectforge/gpwgan/network.hpp"
#include "defectforge/imaging/image.hpp"

namespace defectforge::gpwgan {

struct GanConfig {
  double lambda = 10.0;
  int n_critic = 5;
  int batch_size = 64;
  double adam_alpha = 1e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  int z_dim = 32;
  int patch_h = 16;
  int patch_w = 16;
  std::int64_t iterations = 1000;
  std::uint64_t seed = 0;

  // Architecture. The critic mirrors the generator unless set explicitly.
  std::vector<std::size_t> generator_hidden{128, 256};
  std::vector<std::size_t> critic_hidden{256, 128};
  OutputMap generator_output = OutputMap::kTanhUnit;
  std::string class_label = "defect";

  std::size_t sample_dim() const {
    return static_cast<std::size_t>(patch_h) * static_cast<std::size_t>(patch_w);
  }
  /// ConfigInvalid on any violated constraint.
  void validate() const;
};

/// Reads a JSON object with keys lambda, n_critic, batch_size, adam_alpha,
/// adam_beta1, adam_beta2, z_dim, patch_h, patch_w, iterations, seed (and
/// optionally generator_hidden, critic_hidden, generator_output, class).
/// Missing keys keep their defaults; unknown keys are ConfigInvalid.
GanConfig parse_gan_config(const std::string& json_text);
GanConfig load_gan_config(const std::filesystem::path& path);
std::string to_json(const GanConfig& config);

struct GeneratorNet {
  Mlp net;
  int z_dim = 0;
  int patch_h = 0;
  int patch_w = 0;
  std::string class_label;
};

struct CriticNet {
  Mlp net;
};

struct LossRecord {
  std::int64_t step = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double penalty = 0.0;
  double w_estimate = 0.0;
};

// One record per generator step; the critic columns average the n_critic
// critic updates that preceded it.
struct LossReport {
  std::vector<LossRecord> records;
};

void write_loss_csv(std::ostream& out, const LossReport& report);

struct SampleCounts {
  std::uint64_t real = 0;
  std::uint64_t noise = 0;
  std::uint64_t delta = 0;
};

struct TrainObserver {
  /// Called after every generator update with cumulative draw counts.
  std::function<void(std::int64_t step, const SampleCounts&)> on_generator_step;
};

struct TrainResult {
  GeneratorNet generator;
  CriticNet critic;
  LossReport report;
  SampleCounts counts;
};

/// Seeded initial networks, exactly those train_gpwgan starts from.
TrainResult initialize_networks(const GanConfig& config);

/// Runs `config.iterations` generator steps of the gradient-penalty WGAN
/// schedule: per step, n_critic critic updates on m fresh (x, z, delta)
/// triples, then one generator update on m fresh noise vectors. Every sample
/// is a flattened vector of config.sample_dim() values.
TrainResult train_gpwgan(const GanConfig& config,
                         std::span<const std::vector<double>> samples,
                         const TrainObserver* observer = nullptr);

/// Convenience overload over patch pixels; every patch must be
/// patch_h x patch_w.
TrainResult train_gpwgan(const GanConfig& config,
                         std::span<const imaging::DefectPatch> patches,
                         const TrainObserver* observer = nullptr);

}  // namespace defectforge::gpwgan
