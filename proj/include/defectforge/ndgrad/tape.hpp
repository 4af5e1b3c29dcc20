// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "defectforge/ndgrad/tensor.hpp"

namespace defectforge::ndgrad {

enum class OpKind {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kLeakyRelu,
  kLeakyReluSlope,
  kTanh,
  kSigmoid,
  kSoftplus,
  kLog,
  kSqrt,
  kReciprocal,
  kSquare,
  kSum,
  kMean,
  kL2Norm,
  kRowSum,
  kRowL2Norm,
  kExpand,
  kExpandCols,
  kSumRows,
  kBroadcastRows,
  kReshape,
};

const char* to_string(OpKind kind);

/// Returns false for ops whose derivative is zero almost everywhere.
bool is_differentiable(OpKind kind);

struct Node {
  OpKind kind = OpKind::kLeaf;
  std::array<NodeId, 2> inputs{kNoNode, kNoNode};
  double attr = 0.0;
  Shape shape;
  std::shared_ptr<const std::vector<double>> value;

  std::size_t arity() const {
    return (inputs[0] != kNoNode ? 1U : 0U) + (inputs[1] != kNoNode ? 1U : 0U);
  }
};

// Append-only record of operations. Inputs of a node always precede it, so
// node order is a topological order. A tape and every tensor recorded on it
// belong to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records `value` as a differentiable input.
  Tensor leaf(const Tensor& value);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const Node> nodes() const { return nodes_; }
  /// The tensor produced by node `id`, still attached to this tape.
  Tensor tensor(NodeId id);

  bool recording() const { return recording_; }

  /// Recomputes every non-leaf node from its inputs and reports whether the
  /// result is bit-identical to what was recorded.
  bool replay_matches() const;

  // Used by the op layer.
  Tensor record(OpKind kind, std::array<NodeId, 2> inputs, double attr,
                Shape shape, std::shared_ptr<const std::vector<double>> value);

 private:
  friend class RecordingScope;
  std::vector<Node> nodes_;
  bool recording_ = true;
};

/// Temporarily switches recording on a tape and restores it on exit.
class RecordingScope {
 public:
  RecordingScope(Tape& tape, bool recording)
      : tape_(tape), saved_(tape.recording_) {
    tape_.recording_ = recording && saved_;
  }
  ~RecordingScope() { tape_.recording_ = saved_; }
  RecordingScope(const RecordingScope&) = delete;
  RecordingScope& operator=(const RecordingScope&) = delete;

 private:
  Tape& tape_;
  bool saved_;
};

/// Gradients of a scalar `output` with respect to each tensor in `wrt`.
/// With `record` set, the backward computation is itself recorded on the
/// tape, so the returned gradients can be differentiated again.
/// Tensors in `wrt` that do not influence `output` receive zeros.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool record = false);

}  // namespace defectforge::ndgrad
