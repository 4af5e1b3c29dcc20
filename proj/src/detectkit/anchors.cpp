// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/detectkit/anchors.hpp"

#include <algorithm>
#include <cmath>

#include "defectforge/common/error.hpp"

namespace defectforge::detectkit {

double iou(const FloatBox& a, const FloatBox& b) {
  const double iw = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double ih = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<FloatBox> generate_anchors(const AnchorSpec& spec, int feature_h, int feature_w,
                                       std::optional<ImageBounds> bounds) {
  if (feature_h < 1 || feature_w < 1)
    fail(ErrorKind::kConfigInvalid, "feature map must be at least 1x1");
  if (!(spec.stride > 0.0) || spec.scales.empty() || spec.ratios.empty())
    fail(ErrorKind::kConfigInvalid, "anchor spec needs a positive stride, scales and ratios");
  for (double v : spec.scales)
    if (!(v > 0.0)) fail(ErrorKind::kConfigInvalid, "anchor scales must be positive");
  for (double v : spec.ratios)
    if (!(v > 0.0)) fail(ErrorKind::kConfigInvalid, "anchor ratios must be positive");

  std::vector<FloatBox> anchors;
  anchors.reserve(static_cast<std::size_t>(feature_h) * static_cast<std::size_t>(feature_w) *
                  spec.scales.size() * spec.ratios.size());
  for (int row = 0; row < feature_h; ++row)
    for (int col = 0; col < feature_w; ++col) {
      const double cx = (col + 0.5) * spec.stride;
      const double cy = (row + 0.5) * spec.stride;
      for (double scale : spec.scales)
        for (double ratio : spec.ratios) {
          const double side = scale * spec.stride;
          const double w = side / std::sqrt(ratio), h = side * std::sqrt(ratio);
          FloatBox b{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
          if (bounds) {
            b.x0 = std::clamp(b.x0, 0.0, bounds->width);
            b.x1 = std::clamp(b.x1, 0.0, bounds->width);
            b.y0 = std::clamp(b.y0, 0.0, bounds->height);
            b.y1 = std::clamp(b.y1, 0.0, bounds->height);
          }
          anchors.push_back(b);
        }
    }
  return anchors;
}

std::vector<AnchorLabel> assign_labels(std::span<const FloatBox> anchors,
                                       std::span<const FloatBox> gts, double pos_iou,
                                       double neg_iou) {
  if (!(pos_iou > neg_iou))
    fail(ErrorKind::kConfigInvalid, "assign_labels needs pos_iou > neg_iou");
  std::vector<double> best(anchors.size(), 0.0);
  std::vector<double> gt_best(gts.size(), 0.0);
  std::vector<double> table(anchors.size() * gts.size());
  for (std::size_t a = 0; a < anchors.size(); ++a)
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double o = iou(anchors[a], gts[g]);
      table[a * gts.size() + g] = o;
      best[a] = std::max(best[a], o);
      gt_best[g] = std::max(gt_best[g], o);
    }
  std::vector<AnchorLabel> labels(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    bool argmax = false;
    for (std::size_t g = 0; g < gts.size(); ++g)
      argmax = argmax || (gt_best[g] > 0.0 && table[a * gts.size() + g] == gt_best[g]);
    if (argmax || best[a] >= pos_iou) labels[a] = AnchorLabel::kPositive;
    else if (best[a] < neg_iou) labels[a] = AnchorLabel::kNegative;
    else labels[a] = AnchorLabel::kIgnore;
  }
  return labels;
}

}  // namespace defectforge::detectkit
