// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/ndgrad/adam.hpp"

#include <cmath>

#include "defectforge/common/error.hpp"

namespace defectforge::ndgrad {

AdamState AdamState::for_params(const ParamSet& params) {
  return AdamState{0, params.zeros_like(), params.zeros_like()};
}

namespace {

void check_aligned(const ParamSet& params, const ParamSet& other,
                   const char* what) {
  if (params.size() != other.size())
    fail(ErrorKind::kNameMismatch,
         std::string(what) + " has " + std::to_string(other.size()) +
             " entries, parameters have " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != other[i].name)
      fail(ErrorKind::kNameMismatch, std::string(what) + " entry '" +
                                         other[i].name + "' does not match '" +
                                         params[i].name + "'");
    if (params[i].value.shape() != other[i].value.shape())
      fail(ErrorKind::kShapeMismatch,
           std::string(what) + " entry '" + other[i].name + "' has shape " +
               shape_string(other[i].value.shape()));
  }
}

}  // namespace

ParamSet adam_step(const ParamSet& params, const ParamSet& grads,
                   AdamState& state, const AdamConfig& config) {
  check_aligned(params, grads, "gradient set");
  check_aligned(params, state.first_moment, "first moment");
  check_aligned(params, state.second_moment, "second moment");

  const std::int64_t t = state.t + 1;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));

  ParamSet next, m_next, v_next;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto theta = params[i].value.values();
    const auto g = grads[i].value.values();
    const auto m = state.first_moment[i].value.values();
    const auto v = state.second_moment[i].value.values();
    std::vector<double> theta_out(theta.size()), m_out(theta.size()),
        v_out(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m_out[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v_out[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m_out[k] / bias1;
      const double v_hat = v_out[k] / bias2;
      theta_out[k] = theta[k] - config.alpha * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    const Shape& shape = params[i].value.shape();
    next.add(params[i].name, Tensor(shape, std::move(theta_out)));
    m_next.add(params[i].name, Tensor(shape, std::move(m_out)));
    v_next.add(params[i].name, Tensor(shape, std::move(v_out)));
  }
  state.t = t;
  state.first_moment = std::move(m_next);
  state.second_moment = std::move(v_next);
  return next;
}

}  // namespace defectforge::ndgrad
