// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defectforge/ndgrad/tape.hpp"
#include "defectforge/ndgrad/tensor.hpp"

// Differentiable operations. Each op validates shapes (ShapeMismatch), rejects
// non-finite results (NonFiniteResult) and, when any input lives on a
// recording tape, records itself there. There is no implicit broadcasting
// except between a scalar factor and a tensor in `scale`/`add_scalar`; use
// expand/broadcast_rows/expand_cols explicitly.
namespace defectforge::ndgrad {

inline constexpr double kLeakySlope = 0.2;

// Linear algebra (rank-2 operands).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor leaky_relu(const Tensor& a, double slope = kLeakySlope);
/// Derivative of leaky_relu: 1 where a > 0, `slope` elsewhere. Not
/// differentiable (its derivative is zero almost everywhere).
Tensor leaky_relu_slope(const Tensor& a, double slope = kLeakySlope);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// log(1 + exp(a)), evaluated stably.
Tensor softplus(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor reciprocal(const Tensor& a);
Tensor square(const Tensor& a);

// Reductions to a rank-0 scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Euclidean norm of all elements.
Tensor l2_norm(const Tensor& a);

// Row-wise operations on rows x cols matrices.
/// rows x cols -> rows x 1.
Tensor row_sum(const Tensor& a);
/// rows x cols -> rows x 1, the Euclidean norm of each row.
Tensor row_l2_norm(const Tensor& a);
/// rows x cols -> 1 x cols.
Tensor sum_rows(const Tensor& a);
/// 1 x cols -> rows x cols.
Tensor broadcast_rows(const Tensor& a, std::size_t rows);
/// rows x 1 -> rows x cols.
Tensor expand_cols(const Tensor& a, std::size_t cols);

/// One-element tensor -> tensor of `shape` filled with its value.
Tensor expand(const Tensor& a, const Shape& shape);
Tensor reshape(const Tensor& a, const Shape& shape);

/// x (rows x n) plus bias (1 x n) on every row.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator-(const Tensor& a) { return scale(a, -1.0); }

}  // namespace defectforge::ndgrad
