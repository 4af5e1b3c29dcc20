// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/gpwgan/synthesize.hpp"

#include <algorithm>
#include <string_view>

#include "defectforge/common/error.hpp"
#include "defectforge/gpwgan/samplers.hpp"
#include "defectforge/imaging/mask.hpp"
#include "json.hpp"

namespace defectforge::gpwgan {

using nlohmann::json;

std::vector<imaging::DefectPatch> synthesize_patches(const GeneratorNet& gen,
                                                     std::size_t count,
                                                     std::uint64_t seed,
                                                     const Postprocess& post) {
  NoiseSampler noise(static_cast<std::size_t>(gen.z_dim),
                     derive_seed(seed, "gpwgan.synthesize"));
  const Tensor out = gen.net.forward(noise.draw(count));
  const std::size_t pixels = static_cast<std::size_t>(gen.patch_h) *
                             static_cast<std::size_t>(gen.patch_w);

  std::vector<imaging::DefectPatch> patches;
  patches.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    imaging::GrayImage img(gen.patch_w, gen.patch_h);
    for (std::size_t k = 0; k < pixels; ++k) {
      double v = out[i * pixels + k];
      if (post.clamp) v = std::clamp(v, 0.0, 1.0);
      img.pixels[k] = v;
    }
    if (post.rescale) {
      const auto [lo, hi] = *post.rescale;
      const auto [mn, mx] = std::minmax_element(img.pixels.begin(), img.pixels.end());
      const double low = *mn, span = *mx - *mn;
      for (double& v : img.pixels)
        v = span > 0.0 ? lo + (v - low) / span * (hi - lo) : lo;
    }
    imaging::DefectPatch patch;
    patch.mask = imaging::feather(imaging::otsu_mask(img));
    patch.pixels = std::move(img);
    patch.class_label = gen.class_label;
    patch.origin = imaging::PatchOrigin::kGenerated;
    patch.source = "gen:" + gen.class_label + "#" + std::to_string(i);
    patches.push_back(std::move(patch));
  }
  return patches;
}

namespace {

constexpr std::string_view kModelMagic = "DFGM";

}  // namespace

void save_generator(const std::filesystem::path& path, const GeneratorNet& gen) {
  const MlpSpec& spec = gen.net.spec();
  const std::string descriptor = json{{"kind", "generator"},
                                      {"widths", spec.widths},
                                      {"hidden_activation", to_string(spec.hidden)},
                                      {"output_map", to_string(spec.output)},
                                      {"z_dim", gen.z_dim},
                                      {"patch_h", gen.patch_h},
                                      {"patch_w", gen.patch_w},
                                      {"class", gen.class_label}}
                                     .dump();
  ndgrad::write_model_file(path, kModelMagic, descriptor, gen.net.params());
}

GeneratorNet load_generator(const std::filesystem::path& path) {
  ndgrad::ModelFile file = ndgrad::read_model_file(path, kModelMagic);
  try {
    const json j = json::parse(file.descriptor);
    MlpSpec spec;
    spec.widths = j.at("widths").get<std::vector<std::size_t>>();
    spec.hidden = parse_activation(j.at("hidden_activation").get<std::string>());
    spec.output = parse_output_map(j.at("output_map").get<std::string>());
    GeneratorNet gen;
    gen.net = Mlp(spec, std::move(file.params));
    gen.z_dim = j.at("z_dim").get<int>();
    gen.patch_h = j.at("patch_h").get<int>();
    gen.patch_w = j.at("patch_w").get<int>();
    gen.class_label = j.at("class").get<std::string>();
    return gen;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParseError, path.string() + ": bad descriptor: " + e.what());
  }
}

}  // namespace defectforge::gpwgan
