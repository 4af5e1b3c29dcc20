// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "defectforge/datakit/dataset.hpp"
#include "defectforge/evalkit/metrics.hpp"
#include "defectforge/ndgrad/paramset.hpp"

namespace defectforge::detectkit {

using evalkit::Detection;

class DetectorModel {
 public:
  virtual ~DetectorModel() = default;
  virtual std::string name() const = 0;
  /// Detections for one image, sorted by descending score.
  virtual std::vector<Detection> infer(const imaging::GrayImage& image,
                                       std::int64_t image_id) const = 0;
};

struct ToyDetectorConfig {
  /// Side of the square grid every window (with its context ring) is
  /// resampled to.
  int template_size = 12;
  int epochs = 150;
  double l2 = 1e-2;
  /// Random background windows drawn per training image and class.
  int negatives_per_image = 16;
  /// Retraining rounds with mined false-positive windows as negatives.
  int hard_negative_rounds = 0;
  int window_stride = 1;
  /// Windows with a standard deviation below this are never scored.
  double min_contrast = 0.06;
  double score_threshold = 0.05;
  double nms_iou = 0.3;
  /// Cap on detections per class and image after NMS.
  std::size_t max_per_class = 10;
  std::uint64_t seed = 0;
};

struct WindowShape {
  int w = 1;
  int h = 1;
  friend bool operator==(const WindowShape&, const WindowShape&) = default;
};

struct ClassTemplate {
  std::string class_label;
  /// Two window shapes, fitted to the class's training boxes.
  std::vector<WindowShape> shapes;
  /// template_size^2 weights followed by a bias.
  std::vector<double> weights;
  /// Training loss per epoch.
  std::vector<double> loss_history;
};

// Per-class logistic template scorer over contrast-normalized windows,
// followed by thresholding and NMS.
class ToyDetector : public DetectorModel {
 public:
  ToyDetector(ToyDetectorConfig config, std::vector<ClassTemplate> classes);

  std::string name() const override { return "toy-template"; }
  std::vector<Detection> infer(const imaging::GrayImage& image,
                               std::int64_t image_id) const override;

  const ToyDetectorConfig& config() const { return config_; }
  const std::vector<ClassTemplate>& classes() const { return classes_; }

 private:
  ToyDetectorConfig config_;
  std::vector<ClassTemplate> classes_;
};

/// Trains one template per class with full-batch gradient descent on
/// window crops; the images must carry pixels. Throws EmptyDataset.
ToyDetector train_toy_detector(const datakit::Dataset& train, const ToyDetectorConfig& config);

/// Runs `model` on every image of `ds`, in image order. The OpenMP version
/// splits images across threads and returns the same list.
std::vector<Detection> detect_all(const DetectorModel& model, const datakit::Dataset& ds);
std::vector<Detection> detect_all_serial(const DetectorModel& model, const datakit::Dataset& ds);

void save_toy_detector(const std::filesystem::path& path, const ToyDetector& model);
ToyDetector load_toy_detector(const std::filesystem::path& path);

/// Reads a predictions file and validates scores and boxes, and when
/// `bounds` is given, image ids and image extents. Throws ParseError or
/// InvalidBox (naming the image id).
std::vector<Detection> import_predictions(const std::filesystem::path& path,
                                          const datakit::Dataset* bounds = nullptr);
void validate_predictions(const std::vector<Detection>& dets, const datakit::Dataset* bounds);

}  // namespace defectforge::detectkit
