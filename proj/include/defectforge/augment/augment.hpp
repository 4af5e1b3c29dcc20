// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "defectforge/datakit/dataset.hpp"
#include "defectforge/gpwgan/train.hpp"
#include "defectforge/imaging/image.hpp"

namespace defectforge::augment {

using datakit::BoundingBox;
using imaging::DefectPatch;
using imaging::GrayImage;

// A defect-free background.
struct ImageBed {
  GrayImage pixels;
  std::string source_id;
};

struct Placement {
  /// Index into the patch list handed to allocate().
  std::size_t patch = 0;
  /// Top-left corner in bed pixels; equals (box.x, box.y).
  int x = 0;
  int y = 0;
  BoundingBox box;
  friend bool operator==(const Placement&, const Placement&) = default;
};

enum class OverlapMode { kDisjoint, kMaxIou };

struct AllocationPolicy {
  /// Inclusive range for the number of defects placed on one bed.
  int min_defects = 1;
  int max_defects = 3;
  OverlapMode overlap = OverlapMode::kDisjoint;
  /// Upper bound on pairwise IoU under kMaxIou, in [0, 1).
  double max_iou = 0.0;
  int max_attempts = 100;
  /// Minimum distance of every placed box to the bed border.
  int margin = 0;

  /// ConfigInvalid on an empty range, tau outside [0, 1) or max_attempts < 1.
  void validate() const;
};

/// One patch per ground-truth box. Pixels are the crop of the box grown by
/// `pad` on every side and clamped to the image; the mask is 1 on the box
/// and falls off linearly across the pad ring (1 - d / (pad + 1) at
/// chessboard distance d). Throws BoxOutOfBounds when a box leaves the image.
std::vector<DefectPatch> extract_patches(const datakit::AnnotatedImage& image, int pad = 0);

/// Draws k from the policy range (capped at patches.size()) and places
/// patches[0 .. k) in order at uniform positions, rejecting positions that
/// break the overlap policy. Throws PatchTooLarge when any patch cannot fit
/// inside the margins, AllocationFailed when a patch exhausts max_attempts.
std::vector<Placement> allocate(const ImageBed& bed, std::span<const DefectPatch> patches,
                                const AllocationPolicy& policy, std::uint64_t seed);

/// mask * patch + (1 - mask) * bed inside the placement box; the rest of the
/// bed is copied unchanged.
GrayImage blend(const GrayImage& bed, const DefectPatch& patch, const Placement& placement);

/// Picks a bed, draws max_defects candidates uniformly (with replacement)
/// from the pool, allocates and blends them. Annotations equal the placed
/// boxes, in placement order, and provenance records the bed, seed and
/// patch sources. The image id is 0 and the file name is empty.
datakit::AnnotatedImage synthesize_sample(std::span<const ImageBed> beds,
                                          std::span<const DefectPatch> pool,
                                          const AllocationPolicy& policy, std::uint64_t seed);

/// Shrinks a patch to the bounding box of its nonzero mask. Throws EmptyMask.
DefectPatch trim_to_mask(const DefectPatch& patch);

/// Transposes portrait patches (height > width) so every patch lies flat.
DefectPatch to_landscape(const DefectPatch& patch);

/// GAN training material for one class: its boxes cropped with `pad`,
/// turned to landscape and resized to patch_w x patch_h.
std::vector<DefectPatch> gan_training_patches(const datakit::Dataset& ds,
                                              const std::string& label, int pad, int patch_w,
                                              int patch_h);

struct AugmentSpec {
  /// Number of synthetic images appended.
  std::size_t m_g = 0;
  /// Probability that a placed defect is a real patch when the class has
  /// both real patches and a generator.
  double real_fraction = 0.5;
  /// Relative class weights; empty means uniform over the classes that
  /// have any patch source. Classes with weight 0 are never drawn.
  std::map<std::string, double> class_mix;
  AllocationPolicy policy;
  /// Pad used when extracting real patches.
  int real_pad = 0;
  std::uint64_t seed = 0;
};

/// A generator and the share of its class's real boxes that stand upright;
/// generated patches are turned upright with that probability.
struct ClassGenerator {
  gpwgan::GeneratorNet net;
  double portrait_fraction = 0.0;
};

/// Appends spec.m_g synthetic images to `real`. Each defect draws a class
/// from the mix, then a real patch (from `real`'s boxes) or a generated one
/// (trimmed to its mask), so the synthetic class histogram follows the mix.
/// Images are numbered from real.next_id() and named synthetic/<id>.png;
/// each derives its randomness from (seed, index), so the OpenMP and
/// serial versions return identical datasets. m_g == 0 returns `real`.
datakit::Dataset build_augmented_dataset(const datakit::Dataset& real,
                                         std::span<const ImageBed> beds,
                                         const std::map<std::string, ClassGenerator>& generators,
                                         const AugmentSpec& spec);
datakit::Dataset build_augmented_dataset_serial(
    const datakit::Dataset& real, std::span<const ImageBed> beds,
    const std::map<std::string, ClassGenerator>& generators, const AugmentSpec& spec);

}  // namespace defectforge::augment
