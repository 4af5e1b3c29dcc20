// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/datakit/micro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"

namespace defectforge::datakit {

namespace {

using imaging::GrayImage;

GrayImage background(const MicroConfig& c, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, c.noise_sigma);
  const double base = 0.45 + 0.1 * u(rng);
  const double fx = 2.0 * std::numbers::pi * (0.5 + u(rng)) / c.image_size;
  const double fy = 2.0 * std::numbers::pi * (0.5 + u(rng)) / c.image_size;
  const double px = 2.0 * std::numbers::pi * u(rng), py = 2.0 * std::numbers::pi * u(rng);
  GrayImage img(c.image_size, c.image_size);
  for (int y = 0; y < c.image_size; ++y)
    for (int x = 0; x < c.image_size; ++x)
      img.at(x, y) = base + 0.03 * std::sin(fx * x + px) + 0.03 * std::sin(fy * y + py) +
                     noise(rng);
  return img;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Binary shape mask for one defect of the given kind.
GrayImage shape_mask(std::size_t kind, int size, Rng& rng) {
  GrayImage m(size, size);
  const int margin = 2;
  switch (kind % 3) {
    case 0: {
      const int len = uniform_int(rng, 12, 18), thick = uniform_int(rng, 2, 3);
      const bool horizontal = uniform_int(rng, 0, 1) == 0;
      const int w = horizontal ? len : thick, h = horizontal ? thick : len;
      const int x0 = uniform_int(rng, margin, size - margin - w);
      const int y0 = uniform_int(rng, margin, size - margin - h);
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) m.at(x, y) = 1.0;
      break;
    }
    case 1: {
      const int r = uniform_int(rng, 3, 5);
      const int cx = uniform_int(rng, margin + r, size - margin - r - 1);
      const int cy = uniform_int(rng, margin + r, size - margin - r - 1);
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1.0;
      break;
    }
    default: {
      const int s = uniform_int(rng, 7, 10);
      const int x0 = uniform_int(rng, margin, size - margin - s);
      const int y0 = uniform_int(rng, margin, size - margin - s);
      for (int y = y0; y < y0 + s; ++y)
        for (int x = x0; x < x0 + s; ++x) m.at(x, y) = 1.0;
      break;
    }
  }
  return m;
}

double contrast(std::size_t kind) {
  switch (kind % 3) {
    case 0: return -0.28;
    case 1: return -0.32;
    default: return 0.25;
  }
}

}  // namespace

Dataset make_micro_dataset(const MicroConfig& config, std::uint64_t seed) {
  if (config.image_size < 24 || config.classes.empty())
    fail(ErrorKind::kConfigInvalid, "micro dataset needs image_size >= 24 and a class list");
  Dataset ds;
  ds.classes = config.classes;
  std::int64_t id = 0;
  for (std::size_t c = 0; c < config.classes.size(); ++c)
    for (std::size_t i = 0; i < config.images_per_class; ++i, ++id) {
      Rng rng = make_rng(seed, "datakit.micro.image", static_cast<std::uint64_t>(id));
      AnnotatedImage img;
      img.id = id;
      img.file = "images/" + config.classes[c] + "_" + std::to_string(i) + ".png";
      img.width = img.height = config.image_size;
      img.pixels = background(config, rng);
      const GrayImage mask = shape_mask(c, config.image_size, rng);
      const double delta = contrast(c);
      for (std::size_t p = 0; p < mask.pixels.size(); ++p)
        if (mask.pixels[p] > 0.5)
          img.pixels.pixels[p] = std::clamp(img.pixels.pixels[p] + delta, 0.0, 1.0);
      for (double& v : img.pixels.pixels) v = std::clamp(v, 0.0, 1.0);
      img.annotations.push_back({config.classes[c], seg_to_bbox(mask)});
      ds.images.push_back(std::move(img));
    }
  return ds;
}

std::vector<imaging::GrayImage> make_micro_beds(const MicroConfig& config, std::size_t count,
                                                std::uint64_t seed) {
  std::vector<imaging::GrayImage> beds;
  beds.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, "datakit.micro.bed", i);
    GrayImage bed = background(config, rng);
    for (double& v : bed.pixels) v = std::clamp(v, 0.0, 1.0);
    beds.push_back(std::move(bed));
  }
  return beds;
}

}  // namespace defectforge::datakit
