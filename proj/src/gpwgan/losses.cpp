// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/gpwgan/losses.hpp"

#include <string>

#include "defectforge/common/error.hpp"
#include "defectforge/ndgrad/ops.hpp"

namespace defectforge::gpwgan {

namespace ng = ndgrad;

namespace {

void check_delta(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    fail(ErrorKind::kDeltaOutOfRange,
         "interpolation weight " + std::to_string(delta) + " outside [0, 1]");
}

void same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    fail(ErrorKind::kShapeMismatch, std::string(what) + ": " +
                                        ng::shape_string(a.shape()) + " vs " +
                                        ng::shape_string(b.shape()));
}

}  // namespace

Tensor interpolate(const Tensor& real, const Tensor& fake, double delta) {
  same_shape(real, fake, "interpolate");
  check_delta(delta);
  return ng::add(ng::scale(real, delta), ng::scale(fake, 1.0 - delta));
}

Tensor interpolate_rows(const Tensor& real, const Tensor& fake,
                        std::span<const double> deltas) {
  same_shape(real, fake, "interpolate_rows");
  if (real.rank() != 2 || deltas.size() != real.dim(0))
    fail(ErrorKind::kShapeMismatch, "interpolate_rows needs one weight per row");
  const std::size_t rows = real.dim(0), cols = real.dim(1);
  std::vector<double> w(rows * cols), w_complement(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    check_delta(deltas[i]);
    for (std::size_t j = 0; j < cols; ++j) {
      w[i * cols + j] = deltas[i];
      w_complement[i * cols + j] = 1.0 - deltas[i];
    }
  }
  return ng::add(ng::mul(real, Tensor(real.shape(), std::move(w))),
                 ng::mul(fake, Tensor(real.shape(), std::move(w_complement))));
}

Tensor gradient_penalty(const CriticFn& critic, const Tensor& interpolates,
                        double lambda) {
  if (!interpolates.on_tape())
    fail(ErrorKind::kNotOnTape, "gradient_penalty: interpolates must be on a tape");
  if (interpolates.rank() != 2)
    fail(ErrorKind::kShapeMismatch, "gradient_penalty: interpolates must be (m x d)");
  const Tensor scores = critic(interpolates);
  const Tensor input_grad =
      ng::grad(ng::sum(scores), std::span(&interpolates, 1), /*record=*/true)[0];
  const Tensor deviation = ng::add_scalar(ng::row_l2_norm(input_grad), -1.0);
  return ng::scale(ng::mean(ng::square(deviation)), lambda);
}

CriticLossTerms critic_loss(const CriticFn& critic, const Tensor& real,
                            const Tensor& fake, const Tensor& interpolates,
                            double lambda) {
  same_shape(real, fake, "critic_loss");
  same_shape(real, interpolates, "critic_loss");
  const Tensor d_real = critic(real);
  const Tensor d_fake = critic(fake);
  const Tensor penalty = gradient_penalty(critic, interpolates, lambda);
  const Tensor loss =
      ng::add(ng::sub(ng::mean(d_fake), ng::mean(d_real)), penalty);
  return {loss, penalty, wasserstein_estimate(d_real, d_fake)};
}

Tensor generator_loss(const CriticFn& critic, const Tensor& fake) {
  return ng::scale(ng::mean(critic(fake)), -1.0);
}

double wasserstein_estimate(const Tensor& d_real, const Tensor& d_fake) {
  double real_sum = 0.0, fake_sum = 0.0;
  for (double v : d_real.values()) real_sum += v;
  for (double v : d_fake.values()) fake_sum += v;
  return real_sum / static_cast<double>(d_real.size()) -
         fake_sum / static_cast<double>(d_fake.size());
}

Tensor vanilla_gan_discriminator_loss(const Tensor& d_real, const Tensor& d_fake) {
  for (const Tensor* t : {&d_real, &d_fake})
    for (double v : t->values())
      if (!(v > 0.0 && v < 1.0))
        fail(ErrorKind::kDomainError,
             "discriminator output " + std::to_string(v) + " outside (0, 1)");
  const Tensor real_term = ng::mean(ng::log(d_real));
  const Tensor fake_term = ng::mean(ng::log(ng::add_scalar(ng::scale(d_fake, -1.0), 1.0)));
  return ng::scale(ng::add(real_term, fake_term), -1.0);
}

}  // namespace defectforge::gpwgan
