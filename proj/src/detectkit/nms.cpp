// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/detectkit/nms.hpp"

#include <algorithm>
#include <cstdint>

namespace defectforge::detectkit {

namespace {

constexpr std::size_t kParallelBoxes = 256;

std::vector<std::size_t> rank_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

}  // namespace

std::vector<Detection> nms_serial(std::span<const Detection> dets, double iou_threshold) {
  std::vector<Detection> kept;
  for (std::size_t i : rank_order(dets)) {
    bool keep = true;
    for (const auto& k : kept)
      if (evalkit::iou(k.box, dets[i].box) >= iou_threshold) {
        keep = false;
        break;
      }
    if (keep) kept.push_back(dets[i]);
  }
  return kept;
}

std::vector<Detection> nms_parallel(std::span<const Detection> dets, double iou_threshold) {
  const std::vector<std::size_t> order = rank_order(dets);
  const std::size_t n = order.size();
  // suppress[i * n + j], j < i: ranked box j would suppress ranked box i.
  std::vector<char> suppress(n * n, 0);
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    for (std::size_t j = 0; j < i; ++j)
      suppress[i * n + j] =
          evalkit::iou(dets[order[j]].box, dets[order[i]].box) >= iou_threshold ? 1 : 0;
  }
  std::vector<char> alive(n, 0);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < n; ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < i && keep; ++j) keep = !(alive[j] && suppress[i * n + j]);
    if (keep) {
      alive[i] = 1;
      kept.push_back(dets[order[i]]);
    }
  }
  return kept;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  return dets.size() >= kParallelBoxes ? nms_parallel(dets, iou_threshold)
                                       : nms_serial(dets, iou_threshold);
}

}  // namespace defectforge::detectkit
