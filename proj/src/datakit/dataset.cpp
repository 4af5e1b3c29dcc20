// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/datakit/dataset.hpp"

#include <algorithm>
#include <set>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"

namespace defectforge::datakit {

std::string to_string(const BoundingBox& b) {
  return "(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
         std::to_string(b.w) + ", " + std::to_string(b.h) + ")";
}

bool AnnotatedImage::has_class(const std::string& label) const {
  return std::any_of(annotations.begin(), annotations.end(),
                     [&](const Annotation& a) { return a.class_label == label; });
}

std::string AnnotatedImage::primary_class() const {
  return annotations.empty() ? std::string() : annotations.front().class_label;
}

std::map<std::string, std::size_t> Dataset::image_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : classes) counts[c] = 0;
  for (const auto& img : images) {
    std::set<std::string> seen;
    for (const auto& a : img.annotations) seen.insert(a.class_label);
    for (const auto& c : seen) ++counts[c];
  }
  return counts;
}

std::map<std::string, std::size_t> Dataset::annotation_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : classes) counts[c] = 0;
  for (const auto& img : images)
    for (const auto& a : img.annotations) ++counts[a.class_label];
  return counts;
}

void Dataset::validate() const {
  const std::set<std::string> known(classes.begin(), classes.end());
  if (known.size() != classes.size())
    fail(ErrorKind::kConfigInvalid, "duplicate class names in manifest");
  std::set<std::int64_t> ids;
  for (const auto& img : images) {
    if (!ids.insert(img.id).second)
      fail(ErrorKind::kConfigInvalid, "duplicate image id " + std::to_string(img.id));
    if (img.width < 1 || img.height < 1)
      fail(ErrorKind::kConfigInvalid, "image " + std::to_string(img.id) + " has no extent");
    for (const auto& a : img.annotations) {
      if (!known.count(a.class_label))
        fail(ErrorKind::kConfigInvalid, "image " + std::to_string(img.id) +
                                            ": unknown class '" + a.class_label + "'");
      if (!a.box.inside(img.width, img.height))
        fail(ErrorKind::kInvalidBox, "image " + std::to_string(img.id) + ": box " +
                                         to_string(a.box) + " outside " +
                                         std::to_string(img.width) + "x" +
                                         std::to_string(img.height));
    }
  }
}

const AnnotatedImage* Dataset::find(std::int64_t id) const {
  for (const auto& img : images)
    if (img.id == id) return &img;
  return nullptr;
}

std::int64_t Dataset::next_id() const {
  std::int64_t next = 0;
  for (const auto& img : images) next = std::max(next, img.id + 1);
  return next;
}

BoundingBox seg_to_bbox(const imaging::GrayImage& mask) {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y) > 0.5) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) fail(ErrorKind::kEmptyMask, "segmentation mask has no foreground pixel");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Dataset make_imbalanced(const Dataset& ds, const std::string& class_label,
                        std::size_t drop_count, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    if (ds.images[i].has_class(class_label)) candidates.push_back(i);
  if (drop_count > candidates.size())
    fail(ErrorKind::kDropTooLarge, "cannot drop " + std::to_string(drop_count) +
                                       " images of class '" + class_label + "', only " +
                                       std::to_string(candidates.size()) + " exist");
  Rng rng = make_rng(seed, "datakit.imbalance");
  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<char> dropped(ds.images.size(), 0);
  for (std::size_t i = 0; i < drop_count; ++i) dropped[candidates[i]] = 1;

  Dataset out;
  out.classes = ds.classes;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    if (!dropped[i]) out.images.push_back(ds.images[i]);
  return out;
}

std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2 || ds.images.size() < k)
    fail(ErrorKind::kTooFewImages, "k-fold split needs k >= 2 and at least k images (k = " +
                                       std::to_string(k) + ", images = " +
                                       std::to_string(ds.images.size()) + ")");
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    strata[ds.images[i].primary_class()].push_back(i);

  // Round-robin within each shuffled stratum; the counter carries over
  // between strata so that overall fold sizes stay balanced too.
  std::vector<std::size_t> fold_of(ds.images.size());
  Rng rng = make_rng(seed, "datakit.kfold");
  std::size_t next = 0;
  for (auto& [label, members] : strata) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) fold_of[idx] = next++ % k;
  }

  std::vector<Fold> folds(k);
  for (auto& f : folds) f.train.classes = f.test.classes = ds.classes;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    for (std::size_t f = 0; f < k; ++f)
      (fold_of[i] == f ? folds[f].test : folds[f].train).images.push_back(ds.images[i]);
  return folds;
}

}  // namespace defectforge::datakit
