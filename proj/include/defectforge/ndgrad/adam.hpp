// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "defectforge/ndgrad/paramset.hpp"

namespace defectforge::ndgrad {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t t = 0;
  ParamSet first_moment;
  ParamSet second_moment;

  /// Zero moments shaped like `params`.
  static AdamState for_params(const ParamSet& params);
};

/// One bias-corrected Adam update. `params`, `grads` and the moments in
/// `state` must agree in names and shapes (NameMismatch otherwise).
ParamSet adam_step(const ParamSet& params, const ParamSet& grads,
                   AdamState& state, const AdamConfig& config);

}  // namespace defectforge::ndgrad
