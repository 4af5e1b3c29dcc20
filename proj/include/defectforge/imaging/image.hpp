// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace defectforge::imaging {

// Single-channel image with intensities in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  bool empty() const { return pixels.empty(); }
  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

enum class PatchOrigin { kReal, kGenerated };

const char* to_string(PatchOrigin origin);

// A cropped or generated defect with its alpha mask. `mask` and `pixels`
// share dimensions and mask values lie in [0, 1].
struct DefectPatch {
  GrayImage pixels;
  GrayImage mask;
  std::string class_label;
  PatchOrigin origin = PatchOrigin::kReal;
  /// Free-form provenance, e.g. "img12#0" or "gen:scratch#4".
  std::string source;
};

/// Nearest-rank 8-bit quantization used for PNG output: round(v * 255).
unsigned char to_byte(double v);

/// Reads an 8-bit grayscale PNG (other PNG colour types are converted).
GrayImage read_png(const std::filesystem::path& path);
/// Writes an 8-bit grayscale PNG; values are clamped to [0, 1].
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace defectforge::imaging
