// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/ndgrad/ops.hpp"

#include <cmath>
#include <string>

#include "defectforge/common/error.hpp"
#include "defectforge/kernels/linalg.hpp"
#include "op_impl.hpp"

namespace defectforge::ndgrad {

namespace detail {

namespace {

[[noreturn]] void shape_error(OpKind kind, const std::string& what) {
  fail(ErrorKind::kShapeMismatch, std::string(to_string(kind)) + ": " + what);
}

void require_rank2(OpKind kind, const Shape& s) {
  if (s.size() != 2)
    shape_error(kind, "expected a matrix, got " + shape_string(s));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
std::vector<double> map1(std::span<const double> a, F f) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename F>
std::vector<double> map2(std::span<const double> a, std::span<const double> b,
                         F f) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

}  // namespace

Shape infer_shape(OpKind kind, const Operand* a, const Operand* b,
                  const Shape& requested) {
  const Shape& sa = *a->shape;
  switch (kind) {
    case OpKind::kMatMul: {
      const Shape& sb = *b->shape;
      require_rank2(kind, sa);
      require_rank2(kind, sb);
      if (sa[1] != sb[0])
        shape_error(kind, shape_string(sa) + " x " + shape_string(sb));
      return {sa[0], sb[1]};
    }
    case OpKind::kTranspose:
      require_rank2(kind, sa);
      return {sa[1], sa[0]};
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
      if (sa != *b->shape)
        shape_error(kind, shape_string(sa) + " vs " + shape_string(*b->shape));
      return sa;
    case OpKind::kSum:
    case OpKind::kMean:
    case OpKind::kL2Norm:
      return {};
    case OpKind::kRowSum:
    case OpKind::kRowL2Norm:
      require_rank2(kind, sa);
      return {sa[0], 1};
    case OpKind::kSumRows:
      require_rank2(kind, sa);
      return {1, sa[1]};
    case OpKind::kBroadcastRows:
      require_rank2(kind, sa);
      if (sa[0] != 1 || requested.size() != 2 || requested[1] != sa[1])
        shape_error(kind, shape_string(sa) + " -> " + shape_string(requested));
      return requested;
    case OpKind::kExpandCols:
      require_rank2(kind, sa);
      if (sa[1] != 1 || requested.size() != 2 || requested[0] != sa[0])
        shape_error(kind, shape_string(sa) + " -> " + shape_string(requested));
      return requested;
    case OpKind::kExpand:
      if (numel(sa) != 1) shape_error(kind, "source must have one element");
      return requested;
    case OpKind::kReshape:
      if (numel(sa) != numel(requested))
        shape_error(kind, shape_string(sa) + " -> " + shape_string(requested));
      return requested;
    default:
      return sa;
  }
}

std::vector<double> compute(OpKind kind, double attr, const Shape& out,
                            const Operand* a, const Operand* b) {
  const auto av = a->values;
  switch (kind) {
    case OpKind::kLeaf:
      return {av.begin(), av.end()};
    case OpKind::kMatMul: {
      const Shape& sa = *a->shape;
      std::vector<double> c(out[0] * out[1]);
      kernels::matmul(av, b->values, c, sa[0], sa[1], out[1]);
      return c;
    }
    case OpKind::kTranspose: {
      std::vector<double> c(av.size());
      kernels::transpose(av, c, (*a->shape)[0], (*a->shape)[1]);
      return c;
    }
    case OpKind::kAdd:
      return map2(av, b->values, [](double x, double y) { return x + y; });
    case OpKind::kSub:
      return map2(av, b->values, [](double x, double y) { return x - y; });
    case OpKind::kMul:
      return map2(av, b->values, [](double x, double y) { return x * y; });
    case OpKind::kScale:
      return map1(av, [attr](double x) { return x * attr; });
    case OpKind::kAddScalar:
      return map1(av, [attr](double x) { return x + attr; });
    case OpKind::kLeakyRelu:
      return map1(av, [attr](double x) { return x > 0.0 ? x : attr * x; });
    case OpKind::kLeakyReluSlope:
      return map1(av, [attr](double x) { return x > 0.0 ? 1.0 : attr; });
    case OpKind::kTanh:
      return map1(av, [](double x) { return std::tanh(x); });
    case OpKind::kSigmoid:
      return map1(av, stable_sigmoid);
    case OpKind::kSoftplus:
      return map1(av, [](double x) {
        return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
      });
    case OpKind::kLog:
      return map1(av, [](double x) { return std::log(x); });
    case OpKind::kSqrt:
      return map1(av, [](double x) { return std::sqrt(x); });
    case OpKind::kReciprocal:
      return map1(av, [](double x) { return 1.0 / x; });
    case OpKind::kSquare:
      return map1(av, [](double x) { return x * x; });
    case OpKind::kSum:
    case OpKind::kMean: {
      double s = 0.0;
      for (double x : av) s += x;
      if (kind == OpKind::kMean) s /= static_cast<double>(av.size());
      return {s};
    }
    case OpKind::kL2Norm: {
      double s = 0.0;
      for (double x : av) s += x * x;
      return {std::sqrt(s)};
    }
    case OpKind::kRowSum:
    case OpKind::kRowL2Norm: {
      const std::size_t rows = (*a->shape)[0], cols = (*a->shape)[1];
      std::vector<double> c(rows, 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          const double x = av[i * cols + j];
          s += kind == OpKind::kRowSum ? x : x * x;
        }
        c[i] = kind == OpKind::kRowSum ? s : std::sqrt(s);
      }
      return c;
    }
    case OpKind::kSumRows: {
      const std::size_t rows = (*a->shape)[0], cols = (*a->shape)[1];
      std::vector<double> c(cols, 0.0);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) c[j] += av[i * cols + j];
      return c;
    }
    case OpKind::kBroadcastRows: {
      std::vector<double> c;
      c.reserve(out[0] * out[1]);
      for (std::size_t i = 0; i < out[0]; ++i)
        c.insert(c.end(), av.begin(), av.end());
      return c;
    }
    case OpKind::kExpandCols: {
      std::vector<double> c(out[0] * out[1]);
      for (std::size_t i = 0; i < out[0]; ++i)
        for (std::size_t j = 0; j < out[1]; ++j) c[i * out[1] + j] = av[i];
      return c;
    }
    case OpKind::kExpand:
      return std::vector<double>(numel(out), av[0]);
    case OpKind::kReshape:
      return {av.begin(), av.end()};
  }
  return {};
}

std::array<std::optional<Tensor>, 2> backward(Tape& tape, NodeId id,
                                              const Tensor& g,
                                              std::array<bool, 2> needed) {
  // Copies: recording below may grow the tape and move its nodes.
  const Node node = tape.node(id);
  const OpKind kind = node.kind;
  const double attr = node.attr;
  const Shape in_shape =
      node.inputs[0] != kNoNode ? tape.node(node.inputs[0]).shape : Shape{};
  std::array<std::optional<Tensor>, 2> out;
  auto input = [&](int k) { return tape.tensor(node.inputs[k]); };
  auto self = [&] { return tape.tensor(id); };

  switch (kind) {
    case OpKind::kLeaf:
    case OpKind::kLeakyReluSlope:
      break;
    case OpKind::kMatMul:
      if (needed[0]) out[0] = matmul(g, transpose(input(1)));
      if (needed[1]) out[1] = matmul(transpose(input(0)), g);
      break;
    case OpKind::kTranspose:
      out[0] = transpose(g);
      break;
    case OpKind::kAdd:
      out[0] = g;
      out[1] = g;
      break;
    case OpKind::kSub:
      out[0] = g;
      if (needed[1]) out[1] = scale(g, -1.0);
      break;
    case OpKind::kMul:
      if (needed[0]) out[0] = mul(g, input(1));
      if (needed[1]) out[1] = mul(g, input(0));
      break;
    case OpKind::kScale:
      out[0] = scale(g, attr);
      break;
    case OpKind::kAddScalar:
      out[0] = g;
      break;
    case OpKind::kLeakyRelu:
      out[0] = mul(g, leaky_relu_slope(input(0), attr));
      break;
    case OpKind::kTanh:
      out[0] = mul(g, add_scalar(scale(square(self()), -1.0), 1.0));
      break;
    case OpKind::kSigmoid: {
      const Tensor y = self();
      out[0] = mul(g, mul(y, add_scalar(scale(y, -1.0), 1.0)));
      break;
    }
    case OpKind::kSoftplus:
      out[0] = mul(g, sigmoid(input(0)));
      break;
    case OpKind::kLog:
      out[0] = mul(g, reciprocal(input(0)));
      break;
    case OpKind::kSqrt:
      out[0] = mul(g, scale(reciprocal(self()), 0.5));
      break;
    case OpKind::kReciprocal:
      out[0] = mul(g, scale(square(self()), -1.0));
      break;
    case OpKind::kSquare:
      out[0] = mul(g, scale(input(0), 2.0));
      break;
    case OpKind::kSum:
      out[0] = expand(g, in_shape);
      break;
    case OpKind::kMean: {
      out[0] = expand(scale(g, 1.0 / static_cast<double>(numel(in_shape))),
                      in_shape);
      break;
    }
    case OpKind::kL2Norm: {
      const Tensor a = input(0);
      out[0] = mul(expand(mul(g, reciprocal(self())), a.shape()), a);
      break;
    }
    case OpKind::kRowSum:
      out[0] = expand_cols(g, in_shape[1]);
      break;
    case OpKind::kRowL2Norm: {
      const Tensor a = input(0);
      out[0] = mul(expand_cols(mul(g, reciprocal(self())), a.dim(1)), a);
      break;
    }
    case OpKind::kSumRows:
      out[0] = broadcast_rows(g, in_shape[0]);
      break;
    case OpKind::kBroadcastRows:
      out[0] = sum_rows(g);
      break;
    case OpKind::kExpandCols:
      out[0] = row_sum(g);
      break;
    case OpKind::kExpand:
      out[0] = reshape(sum(g), in_shape);
      break;
    case OpKind::kReshape:
      out[0] = reshape(g, in_shape);
      break;
  }
  return out;
}

}  // namespace detail

namespace {

Tensor apply(OpKind kind, const Tensor& a, const Tensor* b, double attr = 0.0,
             const Shape& requested = {}) {
  Tape* tape = a.tape();
  if (b != nullptr && b->tape() != nullptr) {
    if (tape != nullptr && tape != b->tape())
      fail(ErrorKind::kNotOnTape,
           std::string(to_string(kind)) + ": operands live on different tapes");
    tape = b->tape();
  }

  const detail::Operand oa{&a.shape(), a.values()};
  detail::Operand ob;
  if (b != nullptr) ob = {&b->shape(), b->values()};
  const detail::Operand* pb = b != nullptr ? &ob : nullptr;

  Shape out = detail::infer_shape(kind, &oa, pb, requested);
  std::vector<double> values = detail::compute(kind, attr, out, &oa, pb);
  for (double v : values)
    if (!std::isfinite(v))
      fail(ErrorKind::kNonFiniteResult,
           std::string(to_string(kind)) + " produced a non-finite value");

  auto data = std::make_shared<const std::vector<double>>(std::move(values));
  if (tape != nullptr && tape->recording()) {
    // Constant operands become leaves so the tape alone can replay the node.
    auto id_of = [tape](const Tensor& t) {
      return t.tape() != nullptr ? t.node() : tape->leaf(t).node();
    };
    const NodeId ia = id_of(a);
    const NodeId ib = b != nullptr ? id_of(*b) : kNoNode;
    return tape->record(kind, {ia, ib}, attr, std::move(out), std::move(data));
  }
  return detail::TensorAccess::make(std::move(out), std::move(data));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  return apply(OpKind::kMatMul, a, &b);
}
Tensor transpose(const Tensor& a) { return apply(OpKind::kTranspose, a, nullptr); }
Tensor add(const Tensor& a, const Tensor& b) { return apply(OpKind::kAdd, a, &b); }
Tensor sub(const Tensor& a, const Tensor& b) { return apply(OpKind::kSub, a, &b); }
Tensor mul(const Tensor& a, const Tensor& b) { return apply(OpKind::kMul, a, &b); }
Tensor scale(const Tensor& a, double factor) {
  return apply(OpKind::kScale, a, nullptr, factor);
}
Tensor add_scalar(const Tensor& a, double offset) {
  return apply(OpKind::kAddScalar, a, nullptr, offset);
}
Tensor leaky_relu(const Tensor& a, double slope) {
  return apply(OpKind::kLeakyRelu, a, nullptr, slope);
}
Tensor leaky_relu_slope(const Tensor& a, double slope) {
  return apply(OpKind::kLeakyReluSlope, a, nullptr, slope);
}
Tensor tanh(const Tensor& a) { return apply(OpKind::kTanh, a, nullptr); }
Tensor sigmoid(const Tensor& a) { return apply(OpKind::kSigmoid, a, nullptr); }
Tensor softplus(const Tensor& a) { return apply(OpKind::kSoftplus, a, nullptr); }
Tensor log(const Tensor& a) { return apply(OpKind::kLog, a, nullptr); }
Tensor sqrt(const Tensor& a) { return apply(OpKind::kSqrt, a, nullptr); }
Tensor reciprocal(const Tensor& a) {
  return apply(OpKind::kReciprocal, a, nullptr);
}
Tensor square(const Tensor& a) { return apply(OpKind::kSquare, a, nullptr); }
Tensor sum(const Tensor& a) { return apply(OpKind::kSum, a, nullptr); }
Tensor mean(const Tensor& a) { return apply(OpKind::kMean, a, nullptr); }
Tensor l2_norm(const Tensor& a) { return apply(OpKind::kL2Norm, a, nullptr); }
Tensor row_sum(const Tensor& a) { return apply(OpKind::kRowSum, a, nullptr); }
Tensor row_l2_norm(const Tensor& a) {
  return apply(OpKind::kRowL2Norm, a, nullptr);
}
Tensor sum_rows(const Tensor& a) { return apply(OpKind::kSumRows, a, nullptr); }
Tensor broadcast_rows(const Tensor& a, std::size_t rows) {
  const std::size_t cols = a.rank() == 2 ? a.dim(1) : 0;
  return apply(OpKind::kBroadcastRows, a, nullptr, 0.0, {rows, cols});
}
Tensor expand_cols(const Tensor& a, std::size_t cols) {
  const std::size_t rows = a.rank() == 2 ? a.dim(0) : 0;
  return apply(OpKind::kExpandCols, a, nullptr, 0.0, {rows, cols});
}
Tensor expand(const Tensor& a, const Shape& shape) {
  return apply(OpKind::kExpand, a, nullptr, 0.0, shape);
}
Tensor reshape(const Tensor& a, const Shape& shape) {
  return apply(OpKind::kReshape, a, nullptr, 0.0, shape);
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() != 2)
    fail(ErrorKind::kShapeMismatch,
         "add_row_bias: expected a matrix, got " + shape_string(x.shape()));
  return add(x, broadcast_rows(bias, x.dim(0)));
}

}  // namespace defectforge::ndgrad
