// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "defectforge/common/seed.hpp"
#include "defectforge/ndgrad/tensor.hpp"

namespace defectforge::gpwgan {

using ndgrad::Tensor;

// Uniform draws with replacement from a fixed dataset of equal-length rows.
class RealSampler {
 public:
  RealSampler(std::span<const std::vector<double>> data, std::uint64_t seed);
  /// (m x d) batch.
  Tensor draw(std::size_t m);
  std::uint64_t drawn() const { return drawn_; }

 private:
  std::span<const std::vector<double>> data_;
  Rng rng_;
  std::uint64_t drawn_ = 0;
};

// Standard normal noise.
class NoiseSampler {
 public:
  NoiseSampler(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}
  Tensor draw(std::size_t m);
  std::uint64_t drawn() const { return drawn_; }

 private:
  std::size_t dim_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t drawn_ = 0;
};

// U[0, 1] interpolation weights.
class UniformSampler {
 public:
  explicit UniformSampler(std::uint64_t seed) : rng_(seed) {}
  std::vector<double> draw(std::size_t m);
  std::uint64_t drawn() const { return drawn_; }

 private:
  Rng rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::uint64_t drawn_ = 0;
};

// Toy target: `n` points from `modes` isotropic Gaussians of deviation
// `sigma` whose centers sit evenly on a circle of `radius`, starting at
// angle 0.
std::vector<std::vector<double>> ring_of_gaussians(std::size_t n, std::uint64_t seed,
                                                   int modes = 8, double radius = 2.0,
                                                   double sigma = 0.02);

/// Points within 3 sigma of each ring center (2-D points only).
std::vector<std::size_t> ring_mode_counts(std::span<const std::vector<double>> points,
                                          int modes = 8, double radius = 2.0,
                                          double sigma = 0.02);

}  // namespace defectforge::gpwgan
