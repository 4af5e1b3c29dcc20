// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace defectforge::ndgrad {

using Shape = std::vector<std::size_t>;
using NodeId = std::int64_t;

inline constexpr NodeId kNoNode = -1;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tape;
namespace detail {
struct TensorAccess;
}

// An immutable n-dimensional array of doubles in row-major order. A tensor
// either stands alone (a constant) or refers to the node of a Tape that
// produced it; copies share the underlying buffer.
class Tensor {
 public:
  /// A rank-0 zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  /// A rows x cols matrix.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_->size(); }
  bool is_scalar() const { return size() == 1; }

  std::span<const double> values() const { return *data_; }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  /// The single value of a one-element tensor.
  double item() const;
  std::vector<double> to_vector() const { return *data_; }

  Tape* tape() const { return tape_; }
  NodeId node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr; }

  /// Same values, no tape association.
  Tensor detach() const;

 private:
  friend class Tape;
  friend struct detail::TensorAccess;
  Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data,
         Tape* tape, NodeId node);

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  NodeId node_ = kNoNode;
};

/// Bitwise equality of shape and values.
bool identical(const Tensor& a, const Tensor& b);

}  // namespace defectforge::ndgrad
