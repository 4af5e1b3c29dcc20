// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/ndgrad/tape.hpp"

#include <cstring>
#include <optional>

#include "defectforge/common/error.hpp"
#include "defectforge/ndgrad/ops.hpp"
#include "op_impl.hpp"

namespace defectforge::ndgrad {

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kLeakyReluSlope: return "leaky_relu_slope";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kLog: return "log";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kReciprocal: return "reciprocal";
    case OpKind::kSquare: return "square";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kL2Norm: return "l2_norm";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kRowL2Norm: return "row_l2_norm";
    case OpKind::kExpand: return "expand";
    case OpKind::kExpandCols: return "expand_cols";
    case OpKind::kSumRows: return "sum_rows";
    case OpKind::kBroadcastRows: return "broadcast_rows";
    case OpKind::kReshape: return "reshape";
  }
  return "unknown";
}

bool is_differentiable(OpKind kind) { return kind != OpKind::kLeakyReluSlope; }

Tensor Tape::leaf(const Tensor& value) {
  return record(OpKind::kLeaf, {kNoNode, kNoNode}, 0.0, value.shape(),
                detail::TensorAccess::data(value));
}

Tensor Tape::tensor(NodeId id) {
  const Node& n = node(id);
  return Tensor(n.shape, n.value, this, id);
}

Tensor Tape::record(OpKind kind, std::array<NodeId, 2> inputs, double attr,
                    Shape shape,
                    std::shared_ptr<const std::vector<double>> value) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{kind, inputs, attr, shape, value});
  return Tensor(std::move(shape), std::move(value), this, id);
}

bool Tape::replay_matches() const {
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::kLeaf) continue;
    detail::Operand a, b;
    const detail::Operand* pa = &a;
    const detail::Operand* pb = nullptr;
    if (n.inputs[0] != kNoNode) {
      const Node& in = node(n.inputs[0]);
      a = {&in.shape, *in.value};
    }
    if (n.inputs[1] != kNoNode) {
      const Node& in = node(n.inputs[1]);
      b = {&in.shape, *in.value};
      pb = &b;
    }
    const std::vector<double> again = detail::compute(n.kind, n.attr, n.shape, pa, pb);
    if (again.size() != n.value->size() ||
        std::memcmp(again.data(), n.value->data(),
                    again.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool record) {
  if (output.size() != 1)
    fail(ErrorKind::kNotScalarOutput,
         "grad needs a scalar output, got shape " +
             shape_string(output.shape()));
  Tape* tape = output.tape();
  if (tape == nullptr)
    fail(ErrorKind::kNotOnTape, "grad: output is not on a tape");
  for (const Tensor& w : wrt)
    if (w.tape() != tape)
      fail(ErrorKind::kNotOnTape,
           "grad: a wrt tensor is not on the output's tape");

  const auto last = static_cast<std::size_t>(output.node());
  // needs[i]: node i depends on some wrt tensor.
  std::vector<char> needs(last + 1, 0);
  std::vector<char> is_wrt(last + 1, 0);
  for (const Tensor& w : wrt)
    if (static_cast<std::size_t>(w.node()) <= last)
      needs[static_cast<std::size_t>(w.node())] =
          is_wrt[static_cast<std::size_t>(w.node())] = 1;
  for (std::size_t i = 0; i <= last; ++i) {
    const Node& n = tape->node(static_cast<NodeId>(i));
    if (!is_differentiable(n.kind)) continue;
    for (NodeId in : n.inputs)
      if (in != kNoNode && needs[static_cast<std::size_t>(in)]) needs[i] = 1;
  }

  RecordingScope scope(*tape, record);
  std::vector<std::optional<Tensor>> adjoint(last + 1);
  adjoint[last] = Tensor::full(output.shape(), 1.0);

  for (std::size_t i = last + 1; i-- > 0;) {
    if (!adjoint[i] || !needs[i]) continue;
    const std::array<NodeId, 2> inputs = tape->node(static_cast<NodeId>(i)).inputs;
    std::array<bool, 2> needed{};
    bool any = false;
    for (int k = 0; k < 2; ++k) {
      needed[k] = inputs[k] != kNoNode &&
                  needs[static_cast<std::size_t>(inputs[k])] != 0;
      any = any || needed[k];
    }
    if (!any) continue;
    auto parts = detail::backward(*tape, static_cast<NodeId>(i), *adjoint[i], needed);
    // Free the consumed adjoint early; long tapes hold many of them.
    if (!is_wrt[i]) adjoint[i].reset();
    for (int k = 0; k < 2; ++k) {
      if (!needed[k] || !parts[k]) continue;
      auto& slot = adjoint[static_cast<std::size_t>(inputs[k])];
      slot = slot ? add(*slot, *parts[k]) : *parts[k];
    }
  }

  std::vector<Tensor> result;
  result.reserve(wrt.size());
  for (const Tensor& w : wrt) {
    const auto id = static_cast<std::size_t>(w.node());
    if (id <= last && adjoint[id])
      result.push_back(*adjoint[id]);
    else
      result.push_back(Tensor::zeros(w.shape()));
  }
  return result;
}

}  // namespace defectforge::ndgrad
