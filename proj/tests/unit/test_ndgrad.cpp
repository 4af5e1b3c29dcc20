// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "defectforge/common/error.hpp"
#include "defectforge/ndgrad/adam.hpp"
#include "defectforge/ndgrad/ops.hpp"
#include "defectforge/ndgrad/paramset.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

namespace ng = defectforge::ndgrad;
using defectforge::Error;
using defectforge::ErrorKind;
using ng::Tensor;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kIo;
}

struct OpCase {
  std::string name;
  int arity;
  double lo, hi;
  std::function<Tensor(const std::vector<Tensor>&)> apply;
  bool matrix_inputs = true;
};

std::vector<OpCase> op_cases() {
  using V = std::vector<Tensor>;
  return {
      {"matmul", 2, -1, 1, [](const V& x) { return ng::matmul(x[0], ng::transpose(x[1])); }},
      {"transpose", 1, -1, 1, [](const V& x) { return ng::transpose(x[0]); }},
      {"add", 2, -1, 1, [](const V& x) { return ng::add(x[0], x[1]); }},
      {"sub", 2, -1, 1, [](const V& x) { return ng::sub(x[0], x[1]); }},
      {"mul", 2, -1, 1, [](const V& x) { return ng::mul(x[0], x[1]); }},
      {"scale", 1, -1, 1, [](const V& x) { return ng::scale(x[0], -1.7); }},
      {"add_scalar", 1, -1, 1, [](const V& x) { return ng::add_scalar(x[0], 0.3); }},
      {"leaky_relu", 1, -1, 1, [](const V& x) { return ng::leaky_relu(x[0]); }},
      {"tanh", 1, -2, 2, [](const V& x) { return ng::tanh(x[0]); }},
      {"sigmoid", 1, -3, 3, [](const V& x) { return ng::sigmoid(x[0]); }},
      {"softplus", 1, -3, 3, [](const V& x) { return ng::softplus(x[0]); }},
      {"log", 1, 0.5, 2, [](const V& x) { return ng::log(x[0]); }},
      {"sqrt", 1, 0.5, 2, [](const V& x) { return ng::sqrt(x[0]); }},
      {"reciprocal", 1, 0.5, 2, [](const V& x) { return ng::reciprocal(x[0]); }},
      {"square", 1, -1, 1, [](const V& x) { return ng::square(x[0]); }},
      {"sum", 1, -1, 1, [](const V& x) { return ng::sum(x[0]); }},
      {"mean", 1, -1, 1, [](const V& x) { return ng::mean(x[0]); }},
      {"l2_norm", 1, 0.2, 1, [](const V& x) { return ng::l2_norm(x[0]); }},
      {"row_sum", 1, -1, 1, [](const V& x) { return ng::row_sum(x[0]); }},
      {"row_l2_norm", 1, 0.2, 1, [](const V& x) { return ng::row_l2_norm(x[0]); }},
      {"sum_rows", 1, -1, 1, [](const V& x) { return ng::sum_rows(x[0]); }},
      {"broadcast_rows", 1, -1, 1,
       [](const V& x) { return ng::broadcast_rows(ng::sum_rows(x[0]), 3); }},
      {"expand_cols", 1, -1, 1,
       [](const V& x) { return ng::expand_cols(ng::row_sum(x[0]), 4); }},
      {"expand", 1, -1, 1,
       [](const V& x) { return ng::expand(ng::mean(x[0]), {2, 5}); }},
      {"reshape", 1, -1, 1,
       [](const V& x) { return ng::reshape(x[0], {x[0].size()}); }},
  };
}

// f(inputs) = sum(op(inputs) * weights) for fixed random weights.
double weighted_value(const OpCase& op, const std::vector<std::vector<double>>& raw,
                      const ng::Shape& shape, const std::vector<double>& weights) {
  std::vector<Tensor> inputs;
  for (const auto& r : raw) inputs.emplace_back(shape, r);
  const Tensor y = op.apply(inputs);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * weights[i];
  return s;
}

}  // namespace

TEST_CASE("forward ops match their definitions") {
  CHECK(ng::square(Tensor::scalar(3.0)).item() == 9.0);
  CHECK(ng::l2_norm(Tensor({2}, {3.0, 4.0})).item() == 5.0);

  std::mt19937_64 rng(11);
  const auto a = oracle::uniform_values(rng, 6);
  const auto b = oracle::uniform_values(rng, 3);
  const Tensor c = ng::matmul(Tensor::matrix(2, 3, a), Tensor::matrix(3, 1, b));
  const auto expected = oracle::naive_matmul(a, b, 2, 3, 1);
  REQUIRE(c.shape() == ng::Shape{2, 1});
  CHECK(c[0] == doctest::Approx(expected[0]).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(expected[1]).epsilon(1e-15));
}

TEST_CASE("shape and finiteness errors") {
  const Tensor m23 = Tensor::matrix(2, 3, std::vector<double>(6, 1.0));
  CHECK(kind_of([&] { ng::matmul(m23, m23); }) == ErrorKind::kShapeMismatch);
  CHECK(kind_of([&] { ng::add(m23, ng::transpose(m23)); }) == ErrorKind::kShapeMismatch);
  CHECK(kind_of([&] { Tensor({2, 2}, {1.0}); }) == ErrorKind::kShapeMismatch);
  CHECK(kind_of([&] { ng::log(Tensor::scalar(-1.0)); }) == ErrorKind::kNonFiniteResult);
  CHECK(kind_of([&] { ng::reciprocal(Tensor::scalar(0.0)); }) == ErrorKind::kNonFiniteResult);
  CHECK(kind_of([&] { ng::scale(Tensor::scalar(1e300), 1e300); }) ==
        ErrorKind::kNonFiniteResult);
}

TEST_CASE("first and second derivatives of polynomials") {
  ng::Tape tape;
  const Tensor x = tape.leaf(Tensor::scalar(3.0));
  CHECK(ng::grad(ng::square(x), std::vector{x})[0].item() == 6.0);

  const Tensor y = tape.leaf(Tensor::scalar(2.0));
  const Tensor cube = ng::mul(ng::mul(y, y), y);
  const Tensor dy = ng::grad(cube, std::vector{y}, /*record=*/true)[0];
  CHECK(dy.item() == 12.0);
  REQUIRE(dy.on_tape());
  CHECK(ng::grad(dy, std::vector{y})[0].item() == 12.0);
}

TEST_CASE("grad error paths") {
  ng::Tape tape, other;
  const Tensor x = tape.leaf(Tensor::matrix(1, 2, {1.0, 2.0}));
  const Tensor z = other.leaf(Tensor::scalar(1.0));
  CHECK(kind_of([&] { ng::grad(ng::square(x), std::vector{x}); }) ==
        ErrorKind::kNotScalarOutput);
  CHECK(kind_of([&] { ng::grad(ng::sum(x), std::vector{z}); }) == ErrorKind::kNotOnTape);
  CHECK(kind_of([&] { ng::grad(Tensor::scalar(1.0), std::vector{x}); }) ==
        ErrorKind::kNotOnTape);
  CHECK(kind_of([&] { ng::add(ng::sum(x), z); }) == ErrorKind::kNotOnTape);

  // Unreachable wrt tensors receive zeros.
  const Tensor unused = tape.leaf(Tensor::scalar(5.0));
  const auto g = ng::grad(ng::sum(x), std::vector{unused});
  CHECK(g[0].item() == 0.0);
}

TEST_CASE("every differentiable op matches central differences") {
  std::mt19937_64 rng(2024);
  for (const OpCase& op : op_cases()) {
    CAPTURE(op.name);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const ng::Shape shape{2, 5};
      std::vector<std::vector<double>> raw;
      for (int k = 0; k < op.arity; ++k)
        raw.push_back(oracle::uniform_values(rng, 10, op.lo, op.hi));

      std::vector<Tensor> probe;
      for (const auto& r : raw) probe.emplace_back(shape, r);
      const std::size_t out_size = op.apply(probe).size();
      const auto weights = oracle::uniform_values(rng, out_size);

      ng::Tape tape;
      std::vector<Tensor> leaves;
      for (const auto& r : raw) leaves.push_back(tape.leaf(Tensor(shape, r)));
      const Tensor y = op.apply(leaves);
      const Tensor f = ng::sum(ng::mul(y, Tensor(y.shape(), weights)));
      const auto g = ng::grad(f, leaves);

      const auto fd = oracle::central_difference(
          [&](const std::vector<std::vector<double>>& x) {
            return weighted_value(op, x, shape, weights);
          },
          raw);
      std::vector<std::vector<double>> analytic;
      for (const auto& t : g) analytic.push_back(t.to_vector());
      worst = std::max(worst, oracle::relative_error(oracle::flatten(analytic),
                                                     oracle::flatten(fd)));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("two-layer perceptron gradient matches finite differences") {
  std::mt19937_64 rng(7);
  const std::size_t batch = 4, in = 3, hidden = 5;
  std::vector<std::vector<double>> raw{
      oracle::uniform_values(rng, batch * in), oracle::uniform_values(rng, in * hidden),
      oracle::uniform_values(rng, hidden), oracle::uniform_values(rng, hidden)};
  auto forward = [&](const std::vector<Tensor>& p) {
    const Tensor h = ng::tanh(ng::add_row_bias(ng::matmul(p[0], p[1]), p[2]));
    return ng::mean(ng::square(ng::matmul(h, p[3])));
  };
  auto as_tensors = [&](const std::vector<std::vector<double>>& r) {
    return std::vector<Tensor>{Tensor::matrix(batch, in, r[0]),
                               Tensor::matrix(in, hidden, r[1]),
                               Tensor::matrix(1, hidden, r[2]),
                               Tensor::matrix(hidden, 1, r[3])};
  };
  ng::Tape tape;
  std::vector<Tensor> leaves;
  for (const Tensor& t : as_tensors(raw)) leaves.push_back(tape.leaf(t));
  const auto g = ng::grad(forward(leaves), leaves);
  const auto fd = oracle::central_difference(
      [&](const auto& r) { return forward(as_tensors(r)).item(); }, raw);
  std::vector<std::vector<double>> analytic;
  for (const auto& t : g) analytic.push_back(t.to_vector());
  CHECK(oracle::relative_error(oracle::flatten(analytic), oracle::flatten(fd)) < 1e-4);
}

TEST_CASE("second-order anchor: squared input-gradient norm of a linear map") {
  // D(x) = w.x, ||grad_x D||^2 = ||w||^2, whose gradient in w is 2w.
  ng::Tape tape;
  const Tensor w = tape.leaf(Tensor::matrix(3, 1, {0.5, -1.25, 2.0}));
  const Tensor x = tape.leaf(Tensor::matrix(1, 3, {0.3, 0.1, -0.7}));
  const Tensor d = ng::sum(ng::matmul(x, w));
  const Tensor gx = ng::grad(d, std::vector{x}, /*record=*/true)[0];
  const Tensor gw = ng::grad(ng::sum(ng::square(gx)), std::vector{w})[0];
  CHECK(gw[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gw[1] == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(gw[2] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("double backprop through a tanh network matches differenced gradients") {
  std::mt19937_64 rng(99);
  const std::size_t batch = 3, in = 2, hidden = 4;
  const auto xs = oracle::uniform_values(rng, batch * in);
  std::vector<std::vector<double>> raw{oracle::uniform_values(rng, in * hidden),
                                       oracle::uniform_values(rng, hidden * 1)};
  // penalty(w) = mean over rows of ||grad_x sum(tanh(x W1) W2)||^2
  auto penalty_grad = [&](const std::vector<std::vector<double>>& r, bool want_w_grad,
                          std::vector<std::vector<double>>* w_grad) {
    ng::Tape tape;
    const Tensor w1 = tape.leaf(Tensor::matrix(in, hidden, r[0]));
    const Tensor w2 = tape.leaf(Tensor::matrix(hidden, 1, r[1]));
    const Tensor x = tape.leaf(Tensor::matrix(batch, in, xs));
    const Tensor d = ng::sum(ng::matmul(ng::tanh(ng::matmul(x, w1)), w2));
    const Tensor gx = ng::grad(d, std::vector{x}, true)[0];
    const Tensor p = ng::mean(ng::square(ng::row_l2_norm(gx)));
    if (want_w_grad) {
      const auto g = ng::grad(p, std::vector{w1, w2});
      *w_grad = {g[0].to_vector(), g[1].to_vector()};
    }
    return p.item();
  };
  std::vector<std::vector<double>> analytic;
  penalty_grad(raw, true, &analytic);
  const auto fd = oracle::central_difference(
      [&](const auto& r) { return penalty_grad(r, false, nullptr); }, raw);
  CHECK(oracle::relative_error(oracle::flatten(analytic), oracle::flatten(fd)) < 1e-6);
}

TEST_CASE("tape replay is bit-identical and deterministic") {
  auto build = [](ng::Tape& tape) {
    std::mt19937_64 rng(5);
    const Tensor w = tape.leaf(Tensor::matrix(3, 2, oracle::uniform_values(rng, 6)));
    const Tensor x = tape.leaf(Tensor::matrix(4, 3, oracle::uniform_values(rng, 12)));
    const Tensor out = ng::mean(ng::leaky_relu(ng::matmul(x, w)));
    const Tensor gx = ng::grad(out, std::vector{x}, true)[0];
    return ng::grad(ng::sum(ng::square(gx)), std::vector{w})[0];
  };
  ng::Tape a, b;
  const Tensor ga = build(a);
  const Tensor gb = build(b);
  CHECK(ng::identical(ga, gb));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& na = a.nodes()[i];
    const auto& nb = b.nodes()[i];
    CHECK(na.kind == nb.kind);
    CHECK(ng::identical(Tensor(na.shape, *na.value), Tensor(nb.shape, *nb.value)));
  }
  CHECK(a.replay_matches());
}

TEST_CASE("adam step") {
  ng::ParamSet params;
  params.add("theta", Tensor::scalar(0.0));
  ng::ParamSet grads;
  grads.add("theta", Tensor::scalar(1.0));
  auto state = ng::AdamState::for_params(params);
  const ng::AdamConfig cfg{0.001, 0.9, 0.999, 1e-8};
  const auto next = ng::adam_step(params, grads, state, cfg);
  CHECK(state.t == 1);
  CHECK(next.get("theta").item() == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-14));

  SUBCASE("zero gradient leaves parameters unchanged") {
    auto s = ng::AdamState::for_params(params);
    const auto same = ng::adam_step(params, params.zeros_like(), s, cfg);
    CHECK(same.get("theta").item() == 0.0);
    CHECK(s.t == 1);
  }
  SUBCASE("replayed steps are bit-identical") {
    auto run = [&] {
      auto s = ng::AdamState::for_params(params);
      auto p = ng::adam_step(params, grads, s, cfg);
      return ng::adam_step(p, grads, s, cfg);
    };
    CHECK(ng::identical(run(), run()));
  }
  SUBCASE("mismatched names are rejected") {
    ng::ParamSet wrong;
    wrong.add("phi", Tensor::scalar(1.0));
    auto s = ng::AdamState::for_params(params);
    CHECK(kind_of([&] { ng::adam_step(params, wrong, s, cfg); }) ==
          ErrorKind::kNameMismatch);
  }
}

TEST_CASE("NDG1 container") {
  std::mt19937_64 rng(3);
  ng::ParamSet params;
  params.add("layer0.weight", Tensor::matrix(3, 2, oracle::uniform_values(rng, 6)));
  params.add("layer0.bias", Tensor::matrix(1, 2, oracle::uniform_values(rng, 2)));
  params.add("s", Tensor::scalar(-0.5));
  std::stringstream buf;
  ng::write_paramset(buf, params);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "NDG1");
  // name length of the first record, little-endian
  CHECK(static_cast<unsigned char>(bytes[4]) == 13);
  CHECK(ng::identical(ng::read_paramset(buf), params));

  std::stringstream empty;
  ng::write_paramset(empty, ng::ParamSet{});
  CHECK(ng::read_paramset(empty).empty());

  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  CHECK(kind_of([&] { ng::read_paramset(cut); }) == ErrorKind::kParseError);
  std::stringstream bad("XXXX");
  CHECK(kind_of([&] { ng::read_paramset(bad); }) == ErrorKind::kParseError);

  ng::ParamSet dup;
  dup.add("a", Tensor::scalar(1.0));
  CHECK(kind_of([&] { dup.add("a", Tensor::scalar(2.0)); }) == ErrorKind::kNameMismatch);
}
