// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/ndgrad/tensor.hpp"

#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "defectforge/common/error.hpp"

namespace defectforge::ndgrad {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor()
    : data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)) {
  for (std::size_t extent : shape_)
    if (extent == 0)
      fail(ErrorKind::kShapeMismatch,
           "tensor extents must be positive, got " + shape_string(shape_));
  if (numel(shape_) != values.size())
    fail(ErrorKind::kShapeMismatch,
         "shape " + shape_string(shape_) + " needs " +
             std::to_string(numel(shape_)) + " values, got " +
             std::to_string(values.size()));
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor::Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data,
               Tape* tape, NodeId node)
    : shape_(std::move(shape)), data_(std::move(data)), tape_(tape),
      node_(node) {}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (size() != 1)
    fail(ErrorKind::kNotScalarOutput,
         "item() on tensor of shape " + shape_string(shape_));
  return (*data_)[0];
}

Tensor Tensor::detach() const { return Tensor(shape_, data_, nullptr, kNoNode); }

bool identical(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.values().data(), b.values().data(),
                     a.size() * sizeof(double)) == 0;
}

}  // namespace defectforge::ndgrad
