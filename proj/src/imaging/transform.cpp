// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/imaging/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defectforge/common/error.hpp"

namespace defectforge::imaging {

GrayImage crop(const GrayImage& image, int x, int y, int w, int h) {
  if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > image.width || y + h > image.height)
    fail(ErrorKind::kBoxOutOfBounds,
         "crop (" + std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(w) +
             ", " + std::to_string(h) + ") outside " + std::to_string(image.width) + "x" +
             std::to_string(image.height));
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    std::copy_n(image.pixels.begin() + static_cast<long>((y + r) * image.width + x), w,
                out.pixels.begin() + static_cast<long>(r * w));
  return out;
}

GrayImage resize_bilinear(const GrayImage& image, int width, int height) {
  if (image.empty() || width < 1 || height < 1)
    fail(ErrorKind::kShapeMismatch, "resize of an empty image or to an empty size");
  if (width == image.width && height == image.height) return image;
  GrayImage out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int r = 0; r < height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ty = fy - y0;
    for (int c = 0; c < width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double tx = fx - x0;
      const double top = image.at(x0, y0) * (1 - tx) + image.at(x1, y0) * tx;
      const double bottom = image.at(x0, y1) * (1 - tx) + image.at(x1, y1) * tx;
      out.at(c, r) = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

GrayImage transpose(const GrayImage& image) {
  GrayImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) out.at(y, x) = image.at(x, y);
  return out;
}

}  // namespace defectforge::imaging
