// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "defectforge/datakit/dataset.hpp"

namespace defectforge::evalkit {

using datakit::BoundingBox;

struct Detection {
  std::int64_t image_id = 0;
  std::string class_label;
  BoundingBox box;
  double score = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Intersection over union with integer pixel areas.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy single-image, single-class matching. `dets` must already be in
/// rank order; each detection takes the highest-IoU unmatched ground truth
/// with IoU >= threshold (lowest index on ties). Returns 1 for TP, 0 for FP.
std::vector<char> match_detections(std::span<const BoundingBox> gts,
                                   std::span<const BoundingBox> dets,
                                   double iou_threshold);

enum class ApMode {
  kRaw,          // sum_k P(k) * (r(k) - r(k-1))
  kElevenPoint,  // PASCAL VOC 2007 11-point interpolation
  kEnvelope,     // area under the monotone precision envelope
};

const char* to_string(ApMode mode);
ApMode parse_ap_mode(const std::string& text);

struct PrPoint {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
  double delta_recall = 0.0;
};

/// One point per ranked detection, from TP/FP flags in rank order.
std::vector<PrPoint> pr_curve(std::span<const char> flags, std::size_t num_gt);

/// Throws NoGroundTruth when num_gt is 0.
double average_precision(std::span<const char> flags, std::size_t num_gt,
                         ApMode mode = ApMode::kRaw);

/// Arithmetic mean. Throws EmptyClassSet.
double mean_ap(std::span<const double> aps);

struct ClassResult {
  std::string class_label;
  /// Unset for classes without ground truth; those are left out of the mAP.
  std::optional<double> ap;
  std::size_t num_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalConfig {
  double iou_threshold = 0.5;
  ApMode mode = ApMode::kRaw;
};

struct EvalReport {
  std::vector<ClassResult> classes;
  double map = 0.0;
  std::size_t class_count = 0;
  double iou_threshold = 0.5;
  ApMode mode = ApMode::kRaw;

  const ClassResult* find(const std::string& label) const;
};

/// Scores detections against a manifest. Detections are ranked per class
/// by descending score, ties kept in input order; matching never crosses
/// images. The OpenMP version runs (class, image) pairs in parallel and
/// reduces in a fixed order, so both produce identical reports.
EvalReport evaluate(const datakit::Dataset& truth, std::span<const Detection> dets,
                    const EvalConfig& config = {});
EvalReport evaluate_serial(const datakit::Dataset& truth, std::span<const Detection> dets,
                           const EvalConfig& config = {});

std::string report_json(const EvalReport& report);
/// Columns: class, ap, tp, fp, fn.
void write_report_csv(std::ostream& out, const EvalReport& report);

std::string predictions_json(std::span<const Detection> dets);
/// Parses the predictions schema. Throws ParseError.
std::vector<Detection> parse_predictions_json(const std::string& text,
                                              const std::string& origin = "<memory>");

}  // namespace defectforge::evalkit
