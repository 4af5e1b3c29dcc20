// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

namespace defectforge::detectkit {

// Continuous corner box [x0, x1) x [y0, y1).
struct FloatBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  friend bool operator==(const FloatBox&, const FloatBox&) = default;
};

double iou(const FloatBox& a, const FloatBox& b);

struct AnchorSpec {
  double stride = 16.0;
  /// Anchor side lengths in stride units.
  std::vector<double> scales{8.0};
  /// Height / width ratios.
  std::vector<double> ratios{1.0};
};

struct ImageBounds {
  double width = 0.0;
  double height = 0.0;
};

/// One anchor per (row, col, scale, ratio), in that nesting order. Centers
/// sit at ((col + 0.5) * stride, (row + 0.5) * stride); an anchor of side
/// s = scale * stride and ratio r is s / sqrt(r) wide and s * sqrt(r) high.
/// Anchors are clipped to `bounds` when given.
std::vector<FloatBox> generate_anchors(const AnchorSpec& spec, int feature_h, int feature_w,
                                       std::optional<ImageBounds> bounds = std::nullopt);

enum class AnchorLabel { kNegative = 0, kPositive = 1, kIgnore = -1 };

/// Positive when IoU >= pos_iou or the anchor has the highest IoU for some
/// ground truth (all tied anchors, provided that IoU is above zero);
/// negative when the best IoU is < neg_iou; ignore otherwise.
std::vector<AnchorLabel> assign_labels(std::span<const FloatBox> anchors,
                                       std::span<const FloatBox> gts, double pos_iou = 0.7,
                                       double neg_iou = 0.3);

}  // namespace defectforge::detectkit
