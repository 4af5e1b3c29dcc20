// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/gpwgan/train.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "defectforge/common/error.hpp"
#include "defectforge/gpwgan/losses.hpp"
#include "defectforge/gpwgan/samplers.hpp"
#include "defectforge/ndgrad/adam.hpp"
#include "defectforge/ndgrad/ops.hpp"
#include "json.hpp"

namespace defectforge::gpwgan {

namespace ng = ndgrad;
using nlohmann::json;

void GanConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::kConfigInvalid, what); };
  if (!(lambda >= 0.0)) bad("lambda must be >= 0");
  if (n_critic < 1) bad("n_critic must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(adam_alpha > 0.0)) bad("adam_alpha must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) bad("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) bad("adam_beta2 must lie in [0, 1)");
  if (z_dim < 1 || patch_h < 1 || patch_w < 1) bad("z_dim, patch_h and patch_w must be positive");
  if (iterations < 0) bad("iterations must be >= 0");
  for (std::size_t w : generator_hidden)
    if (w == 0) bad("generator_hidden widths must be positive");
  for (std::size_t w : critic_hidden)
    if (w == 0) bad("critic_hidden widths must be positive");
}

GanConfig parse_gan_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kConfigInvalid, "config must be a JSON object");
  GanConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "n_critic") c.n_critic = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "adam_alpha") c.adam_alpha = value.get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "z_dim") c.z_dim = value.get<int>();
      else if (key == "patch_h") c.patch_h = value.get<int>();
      else if (key == "patch_w") c.patch_w = value.get<int>();
      else if (key == "iterations") c.iterations = value.get<std::int64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "generator_hidden") c.generator_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "critic_hidden") c.critic_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "generator_output") c.generator_output = parse_output_map(value.get<std::string>());
      else if (key == "class") c.class_label = value.get<std::string>();
      else fail(ErrorKind::kConfigInvalid, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfigInvalid, std::string("config value has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

GanConfig load_gan_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_gan_config(buf.str());
}

std::string to_json(const GanConfig& c) {
  const json j = {{"lambda", c.lambda},
                  {"n_critic", c.n_critic},
                  {"batch_size", c.batch_size},
                  {"adam_alpha", c.adam_alpha},
                  {"adam_beta1", c.adam_beta1},
                  {"adam_beta2", c.adam_beta2},
                  {"z_dim", c.z_dim},
                  {"patch_h", c.patch_h},
                  {"patch_w", c.patch_w},
                  {"iterations", c.iterations},
                  {"seed", c.seed},
                  {"generator_hidden", c.generator_hidden},
                  {"critic_hidden", c.critic_hidden},
                  {"generator_output", to_string(c.generator_output)},
                  {"class", c.class_label}};
  return j.dump(2);
}

void write_loss_csv(std::ostream& out, const LossReport& report) {
  out << "step,loss_d,loss_g,penalty,w_estimate\n";
  out << std::setprecision(17);
  for (const auto& r : report.records)
    out << r.step << ',' << r.loss_d << ',' << r.loss_g << ',' << r.penalty << ','
        << r.w_estimate << '\n';
}

TrainResult initialize_networks(const GanConfig& config) {
  config.validate();
  MlpSpec gen_spec;
  gen_spec.widths.push_back(static_cast<std::size_t>(config.z_dim));
  gen_spec.widths.insert(gen_spec.widths.end(), config.generator_hidden.begin(),
                         config.generator_hidden.end());
  gen_spec.widths.push_back(config.sample_dim());
  gen_spec.output = config.generator_output;

  MlpSpec critic_spec;
  critic_spec.widths.push_back(config.sample_dim());
  critic_spec.widths.insert(critic_spec.widths.end(), config.critic_hidden.begin(),
                            config.critic_hidden.end());
  critic_spec.widths.push_back(1);

  Rng gen_rng = make_rng(config.seed, "gpwgan.generator.init");
  Rng critic_rng = make_rng(config.seed, "gpwgan.critic.init");
  TrainResult result;
  result.generator = GeneratorNet{Mlp::initialize(gen_spec, gen_rng), config.z_dim,
                                  config.patch_h, config.patch_w, config.class_label};
  result.critic = CriticNet{Mlp::initialize(critic_spec, critic_rng)};
  return result;
}

TrainResult train_gpwgan(const GanConfig& config,
                         std::span<const std::vector<double>> samples,
                         const TrainObserver* observer) {
  config.validate();
  if (samples.empty()) fail(ErrorKind::kEmptyDataset, "GAN training needs at least one sample");
  for (const auto& s : samples)
    if (s.size() != config.sample_dim())
      fail(ErrorKind::kConfigInvalid,
           "sample of length " + std::to_string(s.size()) + " does not match patch " +
               std::to_string(config.patch_h) + "x" + std::to_string(config.patch_w));

  TrainResult result = initialize_networks(config);
  Mlp& gen = result.generator.net;
  Mlp& critic = result.critic.net;

  const auto m = static_cast<std::size_t>(config.batch_size);
  RealSampler real_sampler(samples, derive_seed(config.seed, "gpwgan.real"));
  NoiseSampler noise_sampler(static_cast<std::size_t>(config.z_dim),
                             derive_seed(config.seed, "gpwgan.noise"));
  UniformSampler delta_sampler(derive_seed(config.seed, "gpwgan.delta"));

  const ng::AdamConfig adam{config.adam_alpha, config.adam_beta1, config.adam_beta2, 1e-8};
  auto critic_state = ng::AdamState::for_params(critic.params());
  auto gen_state = ng::AdamState::for_params(gen.params());

  result.report.records.reserve(static_cast<std::size_t>(config.iterations));
  for (std::int64_t step = 0; step < config.iterations; ++step) {
    LossRecord record{step, 0.0, 0.0, 0.0, 0.0};

    for (int t = 0; t < config.n_critic; ++t) {
      const Tensor real = real_sampler.draw(m);
      const Tensor fake = gen.forward(noise_sampler.draw(m));
      const std::vector<double> deltas = delta_sampler.draw(m);
      const Tensor mixed = interpolate_rows(real, fake, deltas);

      ng::Tape tape;
      const std::vector<Tensor> omega = critic.params().bind(tape);
      const CriticFn d = as_critic(critic, omega);
      const CriticLossTerms terms =
          critic_loss(d, real, fake, tape.leaf(mixed), config.lambda);
      const std::vector<Tensor> grads = ng::grad(terms.loss, omega);
      critic.set_params(ng::adam_step(critic.params(), critic.params().with_values(grads),
                                      critic_state, adam));

      record.loss_d += terms.loss.item();
      record.penalty += terms.penalty.item();
      record.w_estimate += terms.wasserstein_estimate;
    }
    const double n = static_cast<double>(config.n_critic);
    record.loss_d /= n;
    record.penalty /= n;
    record.w_estimate /= n;

    {
      const Tensor z = noise_sampler.draw(m);
      ng::Tape tape;
      const std::vector<Tensor> theta = gen.params().bind(tape);
      const CriticFn d = as_critic(critic, critic.params().constants());
      const Tensor loss = generator_loss(d, gen.forward(theta, z));
      const std::vector<Tensor> grads = ng::grad(loss, theta);
      gen.set_params(
          ng::adam_step(gen.params(), gen.params().with_values(grads), gen_state, adam));
      record.loss_g = loss.item();
    }

    result.report.records.push_back(record);
    result.counts = {real_sampler.drawn(), noise_sampler.drawn(), delta_sampler.drawn()};
    if (observer != nullptr && observer->on_generator_step)
      observer->on_generator_step(step, result.counts);
  }
  return result;
}

TrainResult train_gpwgan(const GanConfig& config,
                         std::span<const imaging::DefectPatch> patches,
                         const TrainObserver* observer) {
  std::vector<std::vector<double>> samples;
  samples.reserve(patches.size());
  for (const auto& p : patches) {
    if (p.pixels.width != config.patch_w || p.pixels.height != config.patch_h)
      fail(ErrorKind::kConfigInvalid,
           "patch " + p.source + " is " + std::to_string(p.pixels.width) + "x" +
               std::to_string(p.pixels.height) + ", expected " +
               std::to_string(config.patch_w) + "x" + std::to_string(config.patch_h));
    samples.push_back(p.pixels.pixels);
  }
  return train_gpwgan(config, samples, observer);
}

}  // namespace defectforge::gpwgan
