// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/imaging/mask.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace defectforge::imaging {

double otsu_threshold(const GrayImage& image) {
  std::array<double, 256> hist{};
  for (double v : image.pixels) hist[to_byte(v)] += 1.0;
  const double total = static_cast<double>(image.pixels.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  double weight_bg = 0.0, sum_bg = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    weight_bg += hist[t];
    if (weight_bg == 0.0) continue;
    const double weight_fg = total - weight_bg;
    if (weight_fg == 0.0) break;
    sum_bg += t * hist[t];
    const double mean_bg = sum_bg / weight_bg;
    const double mean_fg = (sum_all - sum_bg) / weight_fg;
    const double between = weight_bg * weight_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return (best_t + 0.5) / 255.0;
}

GrayImage otsu_mask(const GrayImage& image) {
  GrayImage mask(image.width, image.height, 1.0);
  if (image.empty()) return mask;
  const double t = otsu_threshold(image);
  int above = 0, border = 0;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      if (x != 0 && y != 0 && x != image.width - 1 && y != image.height - 1) continue;
      ++border;
      if (image.at(x, y) > t) ++above;
    }
  const bool bright_foreground = 2 * above <= border;
  int count = 0;
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const bool fg = bright_foreground ? image.pixels[i] > t : image.pixels[i] <= t;
    mask.pixels[i] = fg ? 1.0 : 0.0;
    count += fg ? 1 : 0;
  }
  if (count == 0) std::fill(mask.pixels.begin(), mask.pixels.end(), 1.0);
  return mask;
}

GrayImage feather(const GrayImage& binary, int width) {
  // Two-pass chessboard distance transform to the nearest background pixel.
  const int w = binary.width, h = binary.height;
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> dist(binary.pixels.size());
  auto at = [&](int x, int y) -> int& {
    return dist[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                static_cast<std::size_t>(x)];
  };
  auto get = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return at(x, y);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (binary.at(x, y) < 0.5) {
        at(x, y) = 0;
        continue;
      }
      at(x, y) = std::min({inf, get(x - 1, y) + 1, get(x - 1, y - 1) + 1,
                           get(x, y - 1) + 1, get(x + 1, y - 1) + 1});
    }
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      if (at(x, y) == 0) continue;
      at(x, y) = std::min({at(x, y), get(x + 1, y) + 1, get(x + 1, y + 1) + 1,
                           get(x, y + 1) + 1, get(x - 1, y + 1) + 1});
    }
  GrayImage out(w, h, 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i)
    out.pixels[i] = std::min(1.0, static_cast<double>(dist[i]) / width);
  return out;
}

}  // namespace defectforge::imaging
