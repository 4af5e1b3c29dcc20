// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "defectforge/ndgrad/tape.hpp"
#include "defectforge/ndgrad/tensor.hpp"

namespace defectforge::ndgrad::detail {

struct TensorAccess {
  static Tensor make(Shape shape,
                     std::shared_ptr<const std::vector<double>> data) {
    return Tensor(std::move(shape), std::move(data), nullptr, kNoNode);
  }
  static const std::shared_ptr<const std::vector<double>>& data(
      const Tensor& t) {
    return t.data_;
  }
};

struct Operand {
  const Shape* shape = nullptr;
  std::span<const double> values;
};

/// Output shape of `kind`; `requested` carries the target shape of
/// expand/reshape-style ops.
Shape infer_shape(OpKind kind, const Operand* a, const Operand* b,
                  const Shape& requested);

std::vector<double> compute(OpKind kind, double attr, const Shape& out,
                            const Operand* a, const Operand* b);

/// Adjoints of node `id`'s inputs given the adjoint `g` of its output.
/// Only inputs flagged in `needed` are computed.
std::array<std::optional<Tensor>, 2> backward(Tape& tape, NodeId id,
                                              const Tensor& g,
                                              std::array<bool, 2> needed);

}  // namespace defectforge::ndgrad::detail
