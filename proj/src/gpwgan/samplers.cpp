// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/gpwgan/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "defectforge/common/error.hpp"

namespace defectforge::gpwgan {

RealSampler::RealSampler(std::span<const std::vector<double>> data,
                         std::uint64_t seed)
    : data_(data), rng_(seed) {
  if (data_.empty()) fail(ErrorKind::kEmptyDataset, "real sampler needs data");
}

Tensor RealSampler::draw(std::size_t m) {
  const std::size_t d = data_.front().size();
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<double> batch;
  batch.reserve(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = data_[pick(rng_)];
    batch.insert(batch.end(), row.begin(), row.end());
  }
  drawn_ += m;
  return Tensor::matrix(m, d, std::move(batch));
}

Tensor NoiseSampler::draw(std::size_t m) {
  std::vector<double> batch(m * dim_);
  for (double& v : batch) v = normal_(rng_);
  drawn_ += m;
  return Tensor::matrix(m, dim_, std::move(batch));
}

std::vector<double> UniformSampler::draw(std::size_t m) {
  std::vector<double> out(m);
  for (double& v : out) v = uniform_(rng_);
  drawn_ += m;
  return out;
}

std::vector<std::vector<double>> ring_of_gaussians(std::size_t n, std::uint64_t seed,
                                                   int modes, double radius, double sigma) {
  if (modes < 1 || !(sigma >= 0.0))
    fail(ErrorKind::kConfigInvalid, "ring needs at least one mode and sigma >= 0");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, modes - 1);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<std::vector<double>> out(n);
  for (auto& p : out) {
    const double a = 2.0 * std::numbers::pi * pick(rng) / modes;
    const double x = radius * std::cos(a) + noise(rng);
    p = {x, radius * std::sin(a) + noise(rng)};
  }
  return out;
}

std::vector<std::size_t> ring_mode_counts(std::span<const std::vector<double>> points,
                                          int modes, double radius, double sigma) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(modes, 0)), 0);
  for (const auto& p : points) {
    if (p.size() != 2) fail(ErrorKind::kShapeMismatch, "ring points must be 2-D");
    for (int m = 0; m < modes; ++m) {
      const double a = 2.0 * std::numbers::pi * m / modes;
      if (std::hypot(p[0] - radius * std::cos(a), p[1] - radius * std::sin(a)) <= 3.0 * sigma)
        ++counts[static_cast<std::size_t>(m)];
    }
  }
  return counts;
}

}  // namespace defectforge::gpwgan
