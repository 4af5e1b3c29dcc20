// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/gpwgan/network.hpp"

#include <cmath>
#include <memory>

#include "defectforge/common/error.hpp"
#include "defectforge/ndgrad/ops.hpp"

namespace defectforge::gpwgan {

namespace ng = ndgrad;

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kTanh: return "tanh";
    case Activation::kLinear: return "linear";
  }
  return "linear";
}

const char* to_string(OutputMap m) {
  return m == OutputMap::kTanhUnit ? "tanh_unit" : "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "linear") return Activation::kLinear;
  fail(ErrorKind::kConfigInvalid, "unknown activation '" + name + "'");
}

OutputMap parse_output_map(const std::string& name) {
  if (name == "linear") return OutputMap::kLinear;
  if (name == "tanh_unit") return OutputMap::kTanhUnit;
  fail(ErrorKind::kConfigInvalid, "unknown output map '" + name + "'");
}

namespace {

std::string weight_name(std::size_t layer) {
  return "layer" + std::to_string(layer) + ".weight";
}
std::string bias_name(std::size_t layer) {
  return "layer" + std::to_string(layer) + ".bias";
}

void check_spec(const MlpSpec& spec) {
  if (spec.widths.size() < 2)
    fail(ErrorKind::kConfigInvalid, "an MLP needs at least input and output widths");
  for (std::size_t w : spec.widths)
    if (w == 0) fail(ErrorKind::kConfigInvalid, "MLP widths must be positive");
}

}  // namespace

Mlp::Mlp(MlpSpec spec, ParamSet params) : spec_(std::move(spec)) {
  check_spec(spec_);
  set_params(std::move(params));
}

void Mlp::set_params(ParamSet params) {
  const std::size_t layers = spec_.widths.size() - 1;
  if (params.size() != 2 * layers)
    fail(ErrorKind::kNameMismatch, "MLP expects " + std::to_string(2 * layers) +
                                       " parameter tensors, got " +
                                       std::to_string(params.size()));
  for (std::size_t l = 0; l < layers; ++l) {
    const ng::Shape w_shape{spec_.widths[l], spec_.widths[l + 1]};
    const ng::Shape b_shape{1, spec_.widths[l + 1]};
    if (params[2 * l].name != weight_name(l) || params[2 * l + 1].name != bias_name(l))
      fail(ErrorKind::kNameMismatch, "unexpected parameter names for layer " +
                                         std::to_string(l));
    if (params[2 * l].value.shape() != w_shape || params[2 * l + 1].value.shape() != b_shape)
      fail(ErrorKind::kShapeMismatch, "parameter shapes do not match layer " +
                                          std::to_string(l));
  }
  params_ = std::move(params);
}

Mlp Mlp::initialize(MlpSpec spec, Rng& rng) {
  check_spec(spec);
  ParamSet params;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    const std::size_t fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = u(rng);
    params.add(weight_name(l), Tensor::matrix(fan_in, fan_out, std::move(w)));
    params.add(bias_name(l), Tensor::zeros({1, fan_out}));
  }
  return Mlp(std::move(spec), std::move(params));
}

Tensor Mlp::forward(std::span<const Tensor> weights, const Tensor& x) const {
  const std::size_t layers = spec_.widths.size() - 1;
  if (weights.size() != 2 * layers)
    fail(ErrorKind::kNameMismatch, "forward: wrong number of parameter tensors");
  if (x.rank() != 2 || x.dim(1) != input_dim())
    fail(ErrorKind::kShapeMismatch, "forward: input " + ng::shape_string(x.shape()) +
                                        " does not match width " +
                                        std::to_string(input_dim()));
  Tensor h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    h = ng::add_row_bias(ng::matmul(h, weights[2 * l]), weights[2 * l + 1]);
    if (l + 1 < layers) {
      switch (spec_.hidden) {
        case Activation::kLeakyRelu: h = ng::leaky_relu(h); break;
        case Activation::kTanh: h = ng::tanh(h); break;
        case Activation::kLinear: break;
      }
    }
  }
  if (spec_.output == OutputMap::kTanhUnit)
    h = ng::scale(ng::add_scalar(ng::tanh(h), 1.0), 0.5);
  return h;
}

Tensor Mlp::forward(const Tensor& x) const {
  const auto weights = params_.constants();
  return forward(weights, x);
}

CriticFn as_critic(const Mlp& net, std::vector<Tensor> weights) {
  auto shared = std::make_shared<const std::vector<Tensor>>(std::move(weights));
  return [net, shared](const Tensor& x) { return net.forward(*shared, x); };
}

}  // namespace defectforge::gpwgan
