// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "defectforge/imaging/image.hpp"

namespace defectforge::datakit {

// Integer pixel box, top-left origin. Covers columns [x, x + w) and rows
// [y, y + h).
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool valid() const { return w >= 1 && h >= 1 && x >= 0 && y >= 0; }
  bool inside(int width, int height) const {
    return valid() && right() <= width && bottom() <= height;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

std::string to_string(const BoundingBox& box);

struct Annotation {
  std::string class_label;
  BoundingBox box;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Per-image provenance for synthetic samples.
struct Provenance {
  std::string bed;
  std::uint64_t seed = 0;
  /// One entry per placed patch, e.g. "real:img4#0" or "generated:gen:scratch#3".
  std::vector<std::string> patches;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AnnotatedImage {
  std::int64_t id = 0;
  std::string file;
  int width = 0;
  int height = 0;
  std::vector<Annotation> annotations;
  /// Optional in-memory pixels; empty when only the manifest was loaded.
  imaging::GrayImage pixels;
  /// Set for synthetic images only.
  std::vector<Provenance> provenance;

  bool has_class(const std::string& label) const;
  /// Label of the first annotation, or "" for a defect-free image.
  std::string primary_class() const;
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<AnnotatedImage> images;

  /// Number of images holding at least one box of each class.
  std::map<std::string, std::size_t> image_counts() const;
  /// Number of boxes per class.
  std::map<std::string, std::size_t> annotation_counts() const;
  /// Checks class membership, box bounds and unique ids. Throws
  /// InvalidBox or ConfigInvalid.
  void validate() const;
  const AnnotatedImage* find(std::int64_t id) const;
  std::int64_t next_id() const;
};

/// Tight box around the foreground (values > 0.5) of a mask.
BoundingBox seg_to_bbox(const imaging::GrayImage& mask);

/// Removes `drop_count` images chosen uniformly among those containing
/// `class_label`. Throws DropTooLarge.
Dataset make_imbalanced(const Dataset& ds, const std::string& class_label,
                        std::size_t drop_count, std::uint64_t seed);

struct Fold {
  Dataset train;
  Dataset test;
};

/// Stratified k-fold split keyed on each image's primary class. Test folds
/// partition the dataset and hold within one image of each other per class.
std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace defectforge::datakit
