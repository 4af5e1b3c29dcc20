// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "defectforge/common/seed.hpp"
#include "defectforge/ndgrad/paramset.hpp"

namespace defectforge::gpwgan {

using ndgrad::ParamSet;
using ndgrad::Tensor;

enum class Activation { kLeakyRelu, kTanh, kLinear };

/// Map applied after the last affine layer. kTanhUnit is (tanh(y) + 1) / 2,
/// which lands in [0, 1].
enum class OutputMap { kLinear, kTanhUnit };

const char* to_string(Activation a);
const char* to_string(OutputMap m);
Activation parse_activation(const std::string& name);
OutputMap parse_output_map(const std::string& name);

struct MlpSpec {
  /// Layer widths including input and output, e.g. {z_dim, 128, 256, 64}.
  std::vector<std::size_t> widths;
  Activation hidden = Activation::kLeakyRelu;
  OutputMap output = OutputMap::kLinear;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

// Fully connected network. Parameters are named "layer<i>.weight" (in x out)
// and "layer<i>.bias" (1 x out), in layer order.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, ParamSet params);

  /// He-style uniform fan-in initialization: weights ~ U(-sqrt(6/fan_in),
  /// sqrt(6/fan_in)), biases zero.
  static Mlp initialize(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  const ParamSet& params() const { return params_; }
  void set_params(ParamSet params);

  std::size_t input_dim() const { return spec_.widths.front(); }
  std::size_t output_dim() const { return spec_.widths.back(); }

  /// Forward pass with externally supplied parameter tensors (leaves on a
  /// tape, or constants), in params() order. x is (batch x input_dim).
  Tensor forward(std::span<const Tensor> weights, const Tensor& x) const;
  /// Forward pass with the stored parameters as constants.
  Tensor forward(const Tensor& x) const;

 private:
  MlpSpec spec_;
  ParamSet params_;
};

/// A critic evaluated as a function of its input batch (m x d) -> (m x 1).
using CriticFn = std::function<Tensor(const Tensor&)>;

/// Binds an MLP to fixed parameter tensors (taped or constant).
CriticFn as_critic(const Mlp& net, std::vector<Tensor> weights);

}  // namespace defectforge::gpwgan
