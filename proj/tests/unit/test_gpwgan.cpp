// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <vector>

#include "defectforge/common/error.hpp"
#include "defectforge/gpwgan/losses.hpp"
#include "defectforge/gpwgan/samplers.hpp"
#include "defectforge/gpwgan/synthesize.hpp"
#include "defectforge/gpwgan/train.hpp"
#include "defectforge/ndgrad/ops.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

namespace gw = defectforge::gpwgan;
namespace ng = defectforge::ndgrad;
using defectforge::Error;
using defectforge::ErrorKind;
using ng::Tensor;

namespace {

// D(x) = x . w for a 2-vector w, batch (m x 2) -> (m x 1).
gw::CriticFn linear_critic(const Tensor& w) {
  return [w](const Tensor& x) { return ng::matmul(x, w); };
}

gw::GanConfig tiny_config() {
  gw::GanConfig c;
  c.z_dim = 3;
  c.patch_h = 2;
  c.patch_w = 2;
  c.batch_size = 4;
  c.n_critic = 2;
  c.iterations = 3;
  c.generator_hidden = {6};
  c.critic_hidden = {5};
  c.seed = 42;
  return c;
}

std::vector<std::vector<double>> tiny_dataset() {
  return {{0.1, 0.2, 0.3, 0.4}, {0.9, 0.8, 0.7, 0.6}, {0.5, 0.5, 0.5, 0.5}};
}

}  // namespace

TEST_CASE("interpolate endpoints and midpoint") {
  std::mt19937_64 rng(1);
  for (const ng::Shape& shape : {ng::Shape{}, ng::Shape{3}, ng::Shape{2, 4}}) {
    const Tensor x(shape, oracle::uniform_values(rng, ng::numel(shape)));
    const Tensor xt(shape, oracle::uniform_values(rng, ng::numel(shape)));
    CHECK(ng::identical(gw::interpolate(x, xt, 1.0), x));
    CHECK(ng::identical(gw::interpolate(x, xt, 0.0), xt));
  }
  CHECK(gw::interpolate(Tensor::scalar(2.0), Tensor::scalar(6.0), 0.25).item() == 5.0);
  CHECK_THROWS_AS(gw::interpolate(Tensor::scalar(1), Tensor::scalar(2), 1.5), Error);
  CHECK_THROWS_AS(gw::interpolate(Tensor::scalar(1), Tensor({2}, {1, 2}), 0.5), Error);

  const Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  const Tensor b = Tensor::matrix(2, 2, {5, 6, 7, 8});
  const std::vector<double> d{1.0, 0.0};
  const Tensor r = gw::interpolate_rows(a, b, d);
  CHECK(r.to_vector() == std::vector<double>{1, 2, 7, 8});
}

TEST_CASE("gradient penalty of linear critics") {
  SUBCASE("unit-norm weights give zero penalty") {
    ng::Tape tape;
    const Tensor w = tape.leaf(Tensor::matrix(2, 1, {0.6, 0.8}));
    const Tensor xh = tape.leaf(Tensor::matrix(3, 2, {1, 2, -1, 0.5, 0, 0}));
    CHECK(gw::gradient_penalty(linear_critic(w), xh, 10.0).item() ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("w = (3, 4), lambda = 10") {
    ng::Tape tape;
    const Tensor w = tape.leaf(Tensor::matrix(2, 1, {3.0, 4.0}));
    const Tensor xh = tape.leaf(Tensor::matrix(2, 2, {0.3, -0.2, 1.0, 1.0}));
    const Tensor p = gw::gradient_penalty(linear_critic(w), xh, 10.0);
    CHECK(std::abs(p.item() - 160.0) < 1e-9);
    const Tensor gw_ = ng::grad(p, std::vector{w})[0];
    CHECK(std::abs(gw_[0] - 48.0) < 1e-6);
    CHECK(std::abs(gw_[1] - 64.0) < 1e-6);
  }
  SUBCASE("zero iff every per-sample gradient norm is one") {
    // D(x) = sum_j s_j(x) with per-row gradient norm controlled by a scale.
    for (double s : {0.5, 1.0, 2.0}) {
      ng::Tape tape;
      const double c = s / std::sqrt(2.0);
      const Tensor w = tape.leaf(Tensor::matrix(2, 1, {c, c}));
      const Tensor xh = tape.leaf(Tensor::matrix(1, 2, {0.1, 0.2}));
      const double p = gw::gradient_penalty(linear_critic(w), xh, 10.0).item();
      CHECK((std::abs(p) < 1e-9) == (std::abs(s - 1.0) < 1e-12));
    }
  }
  SUBCASE("untaped interpolates are rejected") {
    const Tensor w = Tensor::matrix(2, 1, {3.0, 4.0});
    CHECK_THROWS_AS(gw::gradient_penalty(linear_critic(w), Tensor::matrix(1, 2, {0, 0}), 1.0),
                    Error);
  }
}

TEST_CASE("critic loss hand cases") {
  ng::Tape tape;
  const Tensor w = tape.leaf(Tensor::matrix(2, 1, {3.0, 4.0}));
  const auto d = linear_critic(w);
  // D(fake) = 6 - 4 = 2, D(real) = 9 - 4 = 5, penalty = 10 * (5 - 1)^2.
  const Tensor real = Tensor::matrix(1, 2, {3.0, -1.0});
  const Tensor fake = Tensor::matrix(1, 2, {2.0, -1.0});
  const Tensor xh = tape.leaf(gw::interpolate(real, fake, 0.5));
  const auto terms = gw::critic_loss(d, real, fake, xh, 10.0);
  CHECK(terms.loss.item() == 157.0);
  CHECK(terms.penalty.item() == 160.0);
  CHECK(terms.wasserstein_estimate == 3.0);

  SUBCASE("lambda 0 and equal critic values cancel") {
    const auto t0 = gw::critic_loss(d, real, real, tape.leaf(real), 0.0);
    CHECK(t0.loss.item() == 0.0);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(gw::critic_loss(d, real, Tensor::matrix(2, 2, {0, 0, 0, 0}), xh, 1.0),
                    Error);
  }
}

TEST_CASE("wasserstein estimate ignores a constant offset of the critic") {
  std::mt19937_64 rng(8);
  const Tensor dr = Tensor::matrix(5, 1, oracle::uniform_values(rng, 5));
  const Tensor df = Tensor::matrix(5, 1, oracle::uniform_values(rng, 5));
  const double base = gw::wasserstein_estimate(dr, df);
  for (double c : {-3.0, 0.5, 100.0})
    CHECK(gw::wasserstein_estimate(ng::add_scalar(dr, c), ng::add_scalar(df, c)) ==
          doctest::Approx(base).epsilon(1e-12));
  CHECK(gw::wasserstein_estimate(Tensor::matrix(1, 1, {5}), Tensor::matrix(1, 1, {2})) == 3.0);
}

TEST_CASE("generator loss") {
  const Tensor scores = Tensor::matrix(2, 1, {1.0, 3.0});
  const gw::CriticFn identity = [](const Tensor& x) { return x; };
  CHECK(gw::generator_loss(identity, scores).item() == -2.0);
  const gw::CriticFn constant = [](const Tensor& x) {
    return ng::add_scalar(ng::scale(ng::row_sum(x), 0.0), 1.5);
  };
  CHECK(gw::generator_loss(constant, Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})).item() == -1.5);

  // d loss / d theta against central differences for small random nets.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    gw::GanConfig c = tiny_config();
    c.seed = seed;
    const auto nets = gw::initialize_networks(c);
    std::mt19937_64 rng(seed + 100);
    const Tensor z = Tensor::matrix(4, 3, oracle::uniform_values(rng, 12));
    const auto critic = gw::as_critic(nets.critic.net, nets.critic.net.params().constants());
    auto loss_at = [&](const std::vector<std::vector<double>>& raw) {
      std::vector<Tensor> ts;
      for (std::size_t i = 0; i < raw.size(); ++i)
        ts.emplace_back(nets.generator.net.params()[i].value.shape(), raw[i]);
      return gw::generator_loss(critic, nets.generator.net.forward(ts, z)).item();
    };
    ng::Tape tape;
    const auto theta = nets.generator.net.params().bind(tape);
    const auto g = ng::grad(gw::generator_loss(critic, nets.generator.net.forward(theta, z)), theta);
    std::vector<std::vector<double>> raw, analytic;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      raw.push_back(theta[i].to_vector());
      analytic.push_back(g[i].to_vector());
    }
    const auto fd = oracle::central_difference(loss_at, raw);
    CHECK(oracle::relative_error(oracle::flatten(analytic), oracle::flatten(fd)) < 1e-4);
  }
}

TEST_CASE("critic loss gradient through the penalty matches finite differences") {
  gw::GanConfig c = tiny_config();
  c.critic_hidden = {5};
  const auto nets = gw::initialize_networks(c);
  std::mt19937_64 rng(5);
  const Tensor real = Tensor::matrix(4, 4, oracle::uniform_values(rng, 16, 0, 1));
  const Tensor fake = Tensor::matrix(4, 4, oracle::uniform_values(rng, 16, 0, 1));
  const std::vector<double> deltas = oracle::uniform_values(rng, 4, 0, 1);
  const Tensor mixed = gw::interpolate_rows(real, fake, deltas);
  const gw::Mlp& net = nets.critic.net;

  auto loss_at = [&](const std::vector<std::vector<double>>& raw) {
    ng::Tape tape;
    std::vector<Tensor> omega;
    for (std::size_t i = 0; i < raw.size(); ++i)
      omega.push_back(tape.leaf(Tensor(net.params()[i].value.shape(), raw[i])));
    return gw::critic_loss(gw::as_critic(net, omega), real, fake, tape.leaf(mixed), 10.0)
        .loss.item();
  };
  ng::Tape tape;
  const auto omega = net.params().bind(tape);
  const auto terms = gw::critic_loss(gw::as_critic(net, omega), real, fake, tape.leaf(mixed), 10.0);
  const auto g = ng::grad(terms.loss, omega);
  std::vector<std::vector<double>> raw, analytic;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    raw.push_back(omega[i].to_vector());
    analytic.push_back(g[i].to_vector());
  }
  const auto fd = oracle::central_difference(loss_at, raw);
  CHECK(oracle::relative_error(oracle::flatten(analytic), oracle::flatten(fd)) < 1e-3);
}

TEST_CASE("vanilla GAN discriminator loss") {
  auto loss = [](double r, double f) {
    return gw::vanilla_gan_discriminator_loss(Tensor::matrix(1, 1, {r}),
                                              Tensor::matrix(1, 1, {f}))
        .item();
  };
  CHECK(loss(0.8, 0.3) == doctest::Approx(-(std::log(0.8) + std::log(0.7))).epsilon(1e-14));
  CHECK(loss(0.8, 0.3) == doctest::Approx(0.5798).epsilon(1e-4));
  CHECK(loss(0.5, 0.5) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(loss(1.0 - 1e-12, 1e-12) < 1e-11);
  CHECK_THROWS_AS(loss(1.0, 0.3), Error);
  CHECK_THROWS_AS(loss(0.5, 0.0), Error);
}

TEST_CASE("samplers are seeded") {
  const auto data = tiny_dataset();
  gw::RealSampler a(data, 9), b(data, 9);
  CHECK(ng::identical(a.draw(5), b.draw(5)));
  gw::NoiseSampler na(3, 4), nb(3, 4);
  CHECK(ng::identical(na.draw(2), nb.draw(2)));
  CHECK(na.drawn() == 2);
  CHECK_THROWS_AS(gw::RealSampler(std::span<const std::vector<double>>{}, 1), Error);
}

TEST_CASE("config parsing and validation") {
  const auto c = gw::parse_gan_config(
      R"({"lambda": 5, "n_critic": 3, "batch_size": 8, "adam_alpha": 0.001,
          "adam_beta1": 0.5, "adam_beta2": 0.99, "z_dim": 4, "patch_h": 8,
          "patch_w": 6, "iterations": 10, "seed": 123})");
  CHECK(c.lambda == 5.0);
  CHECK(c.patch_w == 6);
  CHECK(c.seed == 123);
  CHECK(gw::parse_gan_config(gw::to_json(c)).batch_size == 8);

  auto kind = [](const char* text) {
    try {
      gw::parse_gan_config(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  CHECK(kind(R"({"n_critic": 0})") == ErrorKind::kConfigInvalid);
  CHECK(kind(R"({"lambda": -1})") == ErrorKind::kConfigInvalid);
  CHECK(kind(R"({"adam_beta2": 1.0})") == ErrorKind::kConfigInvalid);
  CHECK(kind(R"({"batch_size": 0})") == ErrorKind::kConfigInvalid);
  CHECK(kind(R"({"bogus": 1})") == ErrorKind::kConfigInvalid);
  CHECK(kind(R"({"seed": "x"})") == ErrorKind::kConfigInvalid);
  CHECK(kind("not json") == ErrorKind::kConfigInvalid);
}

TEST_CASE("training schedule") {
  const auto data = tiny_dataset();
  const gw::GanConfig c = tiny_config();

  SUBCASE("zero iterations leaves the initialization untouched") {
    gw::GanConfig c0 = c;
    c0.iterations = 0;
    const auto trained = gw::train_gpwgan(c0, data);
    const auto init = gw::initialize_networks(c0);
    CHECK(ng::identical(trained.generator.net.params(), init.generator.net.params()));
    CHECK(ng::identical(trained.critic.net.params(), init.critic.net.params()));
    CHECK(trained.report.records.empty());
  }
  SUBCASE("same config and seed are bit-identical") {
    const auto a = gw::train_gpwgan(c, data);
    const auto b = gw::train_gpwgan(c, data);
    CHECK(ng::identical(a.generator.net.params(), b.generator.net.params()));
    CHECK(a.report.records.size() == 3);
    gw::GanConfig other = c;
    other.seed = 43;
    CHECK_FALSE(ng::identical(gw::train_gpwgan(other, data).generator.net.params(),
                              a.generator.net.params()));
  }
  SUBCASE("draw counts per generator step") {
    std::vector<gw::SampleCounts> seen;
    gw::TrainObserver obs;
    obs.on_generator_step = [&](std::int64_t, const gw::SampleCounts& s) { seen.push_back(s); };
    gw::train_gpwgan(c, data, &obs);
    REQUIRE(seen.size() == 3);
    const std::uint64_t m = 4, nc = 2;
    for (std::size_t i = 0; i < seen.size(); ++i) {
      const auto prev = i == 0 ? gw::SampleCounts{} : seen[i - 1];
      CHECK(seen[i].real - prev.real == nc * m);
      CHECK(seen[i].noise - prev.noise == (nc + 1) * m);
      CHECK(seen[i].delta - prev.delta == nc * m);
    }
  }
  SUBCASE("error paths") {
    CHECK_THROWS_AS(gw::train_gpwgan(c, std::vector<std::vector<double>>{}), Error);
    CHECK_THROWS_AS(gw::train_gpwgan(c, std::vector<std::vector<double>>{{1.0}}), Error);
    gw::GanConfig bad = c;
    bad.n_critic = 0;
    CHECK_THROWS_AS(gw::train_gpwgan(bad, data), Error);
  }
  SUBCASE("loss CSV") {
    const auto r = gw::train_gpwgan(c, data);
    std::ostringstream os;
    gw::write_loss_csv(os, r.report);
    const std::string text = os.str();
    CHECK(text.rfind("step,loss_d,loss_g,penalty,w_estimate\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  }
}

TEST_CASE("patch synthesis") {
  gw::GanConfig c = tiny_config();
  c.class_label = "scratch";
  const auto nets = gw::initialize_networks(c);

  const auto patches = gw::synthesize_patches(nets.generator, 3, 17);
  REQUIRE(patches.size() == 3);
  for (const auto& p : patches) {
    CHECK(p.pixels.width == 2);
    CHECK(p.pixels.height == 2);
    CHECK(p.mask.width == 2);
    CHECK(p.class_label == "scratch");
    CHECK(p.origin == defectforge::imaging::PatchOrigin::kGenerated);
  }
  const auto again = gw::synthesize_patches(nets.generator, 3, 17);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again[i].pixels == patches[i].pixels);

  SUBCASE("clamping holds for adversarially scaled linear output") {
    gw::GeneratorNet wild = nets.generator;
    gw::MlpSpec spec = wild.net.spec();
    spec.output = gw::OutputMap::kLinear;
    ng::ParamSet scaled;
    for (const auto& e : wild.net.params()) scaled.add(e.name, ng::scale(e.value, 50.0));
    wild.net = gw::Mlp(spec, scaled);
    double lo = 1.0, hi = 0.0, raw_lo = 0.0, raw_hi = 0.0;
    const auto big = gw::synthesize_patches(wild, 1000, 3);
    gw::Postprocess none;
    none.clamp = false;
    for (const auto& p : gw::synthesize_patches(wild, 1000, 3, none))
      for (double v : p.pixels.pixels) {
        raw_lo = std::min(raw_lo, v);
        raw_hi = std::max(raw_hi, v);
      }
    for (const auto& p : big)
      for (double v : p.pixels.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    CHECK(raw_lo < 0.0);
    CHECK(raw_hi > 1.0);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
  }
  SUBCASE("rescale stretches onto the requested range") {
    gw::Postprocess post;
    post.rescale = std::make_pair(0.2, 0.6);
    for (const auto& p : gw::synthesize_patches(nets.generator, 5, 2, post))
      for (double v : p.pixels.pixels) {
        CHECK(v >= 0.2 - 1e-12);
        CHECK(v <= 0.6 + 1e-12);
      }
  }
}

TEST_CASE("generator model file round-trip") {
  gw::GanConfig c = tiny_config();
  c.class_label = "inclusion";
  const auto nets = gw::initialize_networks(c);
  const auto path = std::filesystem::temp_directory_path() / "df_test_generator.dfgm";
  gw::save_generator(path, nets.generator);
  const auto loaded = gw::load_generator(path);
  CHECK(ng::identical(loaded.net.params(), nets.generator.net.params()));
  CHECK(loaded.net.spec() == nets.generator.net.spec());
  CHECK(loaded.class_label == "inclusion");
  CHECK(loaded.z_dim == 3);
  std::filesystem::remove(path);
}
