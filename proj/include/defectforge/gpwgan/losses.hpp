// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "defectforge/gpwgan/network.hpp"

namespace defectforge::gpwgan {

/// delta * real + (1 - delta) * fake, for delta in [0, 1].
Tensor interpolate(const Tensor& real, const Tensor& fake, double delta);

/// Row-wise interpolation of (m x d) batches with one delta per row.
Tensor interpolate_rows(const Tensor& real, const Tensor& fake,
                        std::span<const double> deltas);

/// lambda * mean_i (||grad_x critic(x)|_{x = interpolates_i}||_2 - 1)^2.
///
/// `interpolates` must live on the same tape as the critic's parameters; the
/// input gradient is recorded (double backprop), so the returned scalar is
/// differentiable with respect to those parameters.
Tensor gradient_penalty(const CriticFn& critic, const Tensor& interpolates,
                        double lambda);

struct CriticLossTerms {
  /// mean D(fake) - mean D(real) + penalty.
  Tensor loss;
  Tensor penalty;
  /// mean D(real) - mean D(fake), the dual estimate of the transport cost.
  double wasserstein_estimate = 0.0;
};

CriticLossTerms critic_loss(const CriticFn& critic, const Tensor& real,
                            const Tensor& fake, const Tensor& interpolates,
                            double lambda);

/// -mean D(fake).
Tensor generator_loss(const CriticFn& critic, const Tensor& fake);

/// mean(d_real) - mean(d_fake) over critic outputs.
double wasserstein_estimate(const Tensor& d_real, const Tensor& d_fake);

/// Baseline GAN discriminator loss -mean log d_real - mean log(1 - d_fake),
/// for post-sigmoid outputs in (0, 1) (DomainError otherwise).
Tensor vanilla_gan_discriminator_loss(const Tensor& d_real, const Tensor& d_fake);

}  // namespace defectforge::gpwgan
