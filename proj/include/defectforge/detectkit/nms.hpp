// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "defectforge/evalkit/metrics.hpp"

namespace defectforge::detectkit {

using evalkit::Detection;

/// Greedy non-maximum suppression for one class: ranks by descending score
/// (stable on ties), keeps the best box and drops every later box whose IoU
/// with a kept box is >= iou_threshold. Output stays in rank order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// Reference version that computes IoUs lazily, one pair at a time.
std::vector<Detection> nms_serial(std::span<const Detection> dets, double iou_threshold);

/// Same result; fills the full IoU matrix with OpenMP before the greedy scan.
std::vector<Detection> nms_parallel(std::span<const Detection> dets, double iou_threshold);

}  // namespace defectforge::detectkit
