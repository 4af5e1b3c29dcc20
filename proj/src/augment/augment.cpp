// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/augment/augment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"
#include "defectforge/gpwgan/synthesize.hpp"
#include "defectforge/imaging/transform.hpp"

namespace defectforge::augment {

namespace {

std::int64_t overlap_area(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const std::int64_t h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return w > 0 && h > 0 ? w * h : 0;
}

bool acceptable(const BoundingBox& b, const std::vector<Placement>& placed,
                const AllocationPolicy& policy) {
  for (const auto& p : placed) {
    const std::int64_t inter = overlap_area(b, p.box);
    if (policy.overlap == OverlapMode::kDisjoint) {
      if (inter > 0) return false;
      continue;
    }
    const std::int64_t uni = static_cast<std::int64_t>(b.w) * b.h +
                             static_cast<std::int64_t>(p.box.w) * p.box.h - inter;
    if (static_cast<double>(inter) / static_cast<double>(uni) > policy.max_iou) return false;
  }
  return true;
}

std::string origin_tag(const DefectPatch& p) {
  return std::string(imaging::to_string(p.origin)) + ":" + p.source;
}

// Allocates and blends the candidates onto one bed.
datakit::AnnotatedImage compose(const ImageBed& bed, std::span<const DefectPatch> candidates,
                                const AllocationPolicy& policy, std::uint64_t seed) {
  const auto placements = allocate(bed, candidates, policy, derive_seed(seed, "augment.allocate"));
  datakit::AnnotatedImage out;
  out.width = bed.pixels.width;
  out.height = bed.pixels.height;
  GrayImage pixels = bed.pixels;
  datakit::Provenance prov{bed.source_id, seed, {}};
  for (const auto& p : placements) {
    const DefectPatch& patch = candidates[p.patch];
    pixels = blend(pixels, patch, p);
    out.annotations.push_back({patch.class_label, p.box});
    prov.patches.push_back(origin_tag(patch));
  }
  out.pixels = std::move(pixels);
  out.provenance.push_back(std::move(prov));
  return out;
}

struct ClassSources {
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::map<std::string, std::vector<DefectPatch>> real;
};

ClassSources gather_sources(const datakit::Dataset& real,
                            const std::map<std::string, ClassGenerator>& generators,
                            const AugmentSpec& spec) {
  if (spec.real_fraction < 0.0 || spec.real_fraction > 1.0)
    fail(ErrorKind::kConfigInvalid, "real_fraction must lie in [0, 1]");
  if (spec.real_pad < 0) fail(ErrorKind::kConfigInvalid, "real_pad must be >= 0");
  spec.policy.validate();
  ClassSources src;
  for (const auto& img : real.images)
    for (auto& p : extract_patches(img, spec.real_pad)) {
      p.source = "img" + std::to_string(img.id) + "#" + p.source;
      src.real[p.class_label].push_back(std::move(p));
    }
  for (const auto& [label, g] : generators)
    if (std::find(real.classes.begin(), real.classes.end(), label) == real.classes.end())
      fail(ErrorKind::kConfigInvalid, "generator for unknown class '" + label + "'");
  for (const auto& [label, w] : spec.class_mix) {
    if (std::find(real.classes.begin(), real.classes.end(), label) == real.classes.end())
      fail(ErrorKind::kConfigInvalid, "class mix names unknown class '" + label + "'");
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorKind::kConfigInvalid, "class mix weight for '" + label + "' must be >= 0");
  }
  for (const auto& label : real.classes) {
    const bool has_source = src.real.count(label) > 0 || generators.count(label) > 0;
    double w = 0.0;
    if (spec.class_mix.empty()) {
      w = has_source ? 1.0 : 0.0;
    } else if (auto it = spec.class_mix.find(label); it != spec.class_mix.end()) {
      w = it->second;
      if (w > 0.0 && !has_source)
        fail(ErrorKind::kConfigInvalid, "class '" + label + "' has no real patch or generator");
    }
    if (w > 0.0) {
      src.labels.push_back(label);
      src.weights.push_back(w);
    }
  }
  if (src.labels.empty())
    fail(ErrorKind::kEmptyDataset, "no class has a patch source for augmentation");
  return src;
}

DefectPatch draw_patch(const std::string& label, const ClassSources& src,
                       const std::map<std::string, ClassGenerator>& generators,
                       const AugmentSpec& spec, Rng& rng) {
  const auto real_it = src.real.find(label);
  const auto gen_it = generators.find(label);
  bool use_real = gen_it == generators.end();
  if (real_it != src.real.end() && gen_it != generators.end())
    use_real = std::bernoulli_distribution(spec.real_fraction)(rng);
  if (use_real) {
    const auto& pool = real_it->second;
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  }
  const std::uint64_t draw_seed = rng();
  DefectPatch p = trim_to_mask(gpwgan::synthesize_patches(gen_it->second.net, 1, draw_seed)[0]);
  if (std::bernoulli_distribution(std::clamp(gen_it->second.portrait_fraction, 0.0, 1.0))(rng)) {
    p.pixels = imaging::transpose(p.pixels);
    p.mask = imaging::transpose(p.mask);
  }
  p.source = "gen:" + label + "@" + std::to_string(draw_seed);
  return p;
}

datakit::AnnotatedImage synthetic_image(std::size_t k, std::span<const ImageBed> beds,
                                        const ClassSources& src,
                                        const std::map<std::string, ClassGenerator>& generators,
                                        const AugmentSpec& spec) {
  const std::uint64_t seed = derive_seed(spec.seed, "augment.sample", k);
  Rng rng(seed);
  const ImageBed& bed = beds[std::uniform_int_distribution<std::size_t>(0, beds.size() - 1)(rng)];
  std::discrete_distribution<std::size_t> pick_class(src.weights.begin(), src.weights.end());
  std::vector<DefectPatch> candidates;
  for (int j = 0; j < spec.policy.max_defects; ++j)
    candidates.push_back(draw_patch(src.labels[pick_class(rng)], src, generators, spec, rng));
  return compose(bed, candidates, spec.policy, seed);
}

template <bool kParallel>
datakit::Dataset build(const datakit::Dataset& real, std::span<const ImageBed> beds,
                       const std::map<std::string, ClassGenerator>& generators,
                       const AugmentSpec& spec) {
  if (spec.m_g == 0) return real;
  if (beds.empty()) fail(ErrorKind::kEmptyDataset, "augmentation needs at least one bed");
  const ClassSources src = gather_sources(real, generators, spec);

  std::vector<datakit::AnnotatedImage> synthetic(spec.m_g);
  const auto n = static_cast<std::int64_t>(spec.m_g);
  if constexpr (kParallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < n; ++k) {
      try {
        synthetic[static_cast<std::size_t>(k)] =
            synthetic_image(static_cast<std::size_t>(k), beds, src, generators, spec);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::int64_t k = 0; k < n; ++k)
      synthetic[static_cast<std::size_t>(k)] =
          synthetic_image(static_cast<std::size_t>(k), beds, src, generators, spec);
  }

  datakit::Dataset out = real;
  std::int64_t id = real.next_id();
  for (auto& img : synthetic) {
    img.id = id++;
    img.file = "synthetic/" + std::to_string(img.id) + ".png";
    out.images.push_back(std::move(img));
  }
  return out;
}

}  // namespace

void AllocationPolicy::validate() const {
  if (min_defects < 0 || max_defects < min_defects)
    fail(ErrorKind::kConfigInvalid, "defects_per_bed range is empty");
  if (overlap == OverlapMode::kMaxIou && !(max_iou >= 0.0 && max_iou < 1.0))
    fail(ErrorKind::kConfigInvalid, "max_iou must lie in [0, 1)");
  if (max_attempts < 1) fail(ErrorKind::kConfigInvalid, "max_attempts must be >= 1");
  if (margin < 0) fail(ErrorKind::kConfigInvalid, "margin must be >= 0");
}

std::vector<DefectPatch> extract_patches(const datakit::AnnotatedImage& image, int pad) {
  if (pad < 0) fail(ErrorKind::kConfigInvalid, "pad must be >= 0");
  std::vector<DefectPatch> out;
  for (std::size_t i = 0; i < image.annotations.size(); ++i) {
    const auto& a = image.annotations[i];
    if (!a.box.inside(image.pixels.width, image.pixels.height))
      fail(ErrorKind::kBoxOutOfBounds, "box " + datakit::to_string(a.box) + " leaves image " +
                                           std::to_string(image.id));
    const int x0 = std::max(0, a.box.x - pad), y0 = std::max(0, a.box.y - pad);
    const int x1 = std::min(image.pixels.width, a.box.right() + pad);
    const int y1 = std::min(image.pixels.height, a.box.bottom() + pad);
    DefectPatch p;
    p.pixels = imaging::crop(image.pixels, x0, y0, x1 - x0, y1 - y0);
    p.mask = GrayImage(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const int dx = std::max({a.box.x - x, x - (a.box.right() - 1), 0});
        const int dy = std::max({a.box.y - y, y - (a.box.bottom() - 1), 0});
        const int d = std::max(dx, dy);
        p.mask.at(x - x0, y - y0) = d == 0 ? 1.0 : 1.0 - static_cast<double>(d) / (pad + 1);
      }
    p.class_label = a.class_label;
    p.origin = imaging::PatchOrigin::kReal;
    p.source = std::to_string(i);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Placement> allocate(const ImageBed& bed, std::span<const DefectPatch> patches,
                                const AllocationPolicy& policy, std::uint64_t seed) {
  policy.validate();
  const int free_w = bed.pixels.width - 2 * policy.margin;
  const int free_h = bed.pixels.height - 2 * policy.margin;
  for (const auto& p : patches) {
    if (p.mask.width != p.pixels.width || p.mask.height != p.pixels.height)
      fail(ErrorKind::kShapeMismatch, "patch " + p.source + ": mask and pixels differ in shape");
    if (p.pixels.width < 1 || p.pixels.height < 1 || p.pixels.width > free_w ||
        p.pixels.height > free_h)
      fail(ErrorKind::kPatchTooLarge,
           "patch " + p.source + " (" + std::to_string(p.pixels.width) + "x" +
               std::to_string(p.pixels.height) + ") does not fit bed " + bed.source_id + " (" +
               std::to_string(bed.pixels.width) + "x" + std::to_string(bed.pixels.height) +
               ", margin " + std::to_string(policy.margin) + ")");
  }
  Rng rng(seed);
  const int k = std::min(std::uniform_int_distribution<int>(policy.min_defects,
                                                            policy.max_defects)(rng),
                         static_cast<int>(patches.size()));
  std::vector<Placement> placed;
  for (int i = 0; i < k; ++i) {
    const auto& p = patches[static_cast<std::size_t>(i)];
    std::uniform_int_distribution<int> xs(policy.margin, policy.margin + free_w - p.pixels.width);
    std::uniform_int_distribution<int> ys(policy.margin, policy.margin + free_h - p.pixels.height);
    bool done = false;
    for (int attempt = 0; attempt < policy.max_attempts && !done; ++attempt) {
      const int x = xs(rng), y = ys(rng);
      const BoundingBox box{x, y, p.pixels.width, p.pixels.height};
      if (!acceptable(box, placed, policy)) continue;
      placed.push_back({static_cast<std::size_t>(i), x, y, box});
      done = true;
    }
    if (!done)
      fail(ErrorKind::kAllocationFailed, "no room for patch " + std::to_string(i) + " on bed " +
                                             bed.source_id + " after " +
                                             std::to_string(policy.max_attempts) + " attempts");
  }
  return placed;
}

GrayImage blend(const GrayImage& bed, const DefectPatch& patch, const Placement& placement) {
  const BoundingBox& b = placement.box;
  if (!b.inside(bed.width, bed.height))
    fail(ErrorKind::kBoxOutOfBounds, "placement " + datakit::to_string(b) + " leaves the bed");
  if (b.w != patch.pixels.width || b.h != patch.pixels.height || b.x != placement.x ||
      b.y != placement.y || patch.mask.width != b.w || patch.mask.height != b.h)
    fail(ErrorKind::kShapeMismatch, "placement " + datakit::to_string(b) +
                                        " does not match its patch");
  GrayImage out = bed;
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x) {
      const double m = patch.mask.at(x, y);
      double& v = out.at(b.x + x, b.y + y);
      v = m * patch.pixels.at(x, y) + (1.0 - m) * v;
    }
  return out;
}

datakit::AnnotatedImage synthesize_sample(std::span<const ImageBed> beds,
                                          std::span<const DefectPatch> pool,
                                          const AllocationPolicy& policy, std::uint64_t seed) {
  if (beds.empty() || pool.empty())
    fail(ErrorKind::kEmptyDataset, "synthesize_sample needs beds and patches");
  policy.validate();
  Rng rng(derive_seed(seed, "augment.pick"));
  const ImageBed& bed = beds[std::uniform_int_distribution<std::size_t>(0, beds.size() - 1)(rng)];
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<DefectPatch> candidates;
  for (int j = 0; j < policy.max_defects; ++j) candidates.push_back(pool[pick(rng)]);
  return compose(bed, candidates, policy, seed);
}

DefectPatch trim_to_mask(const DefectPatch& patch) {
  int x0 = patch.mask.width, y0 = patch.mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < patch.mask.height; ++y)
    for (int x = 0; x < patch.mask.width; ++x)
      if (patch.mask.at(x, y) > 0.0) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) fail(ErrorKind::kEmptyMask, "patch " + patch.source + " has an empty mask");
  DefectPatch out = patch;
  out.pixels = imaging::crop(patch.pixels, x0, y0, x1 - x0 + 1, y1 - y0 + 1);
  out.mask = imaging::crop(patch.mask, x0, y0, x1 - x0 + 1, y1 - y0 + 1);
  return out;
}

DefectPatch to_landscape(const DefectPatch& patch) {
  if (patch.pixels.height <= patch.pixels.width) return patch;
  DefectPatch out = patch;
  out.pixels = imaging::transpose(patch.pixels);
  out.mask = imaging::transpose(patch.mask);
  return out;
}

std::vector<DefectPatch> gan_training_patches(const datakit::Dataset& ds,
                                              const std::string& label, int pad, int patch_w,
                                              int patch_h) {
  std::vector<DefectPatch> out;
  for (const auto& img : ds.images)
    for (auto& p : extract_patches(img, pad)) {
      if (p.class_label != label) continue;
      p = to_landscape(p);
      p.pixels = imaging::resize_bilinear(p.pixels, patch_w, patch_h);
      p.mask = imaging::resize_bilinear(p.mask, patch_w, patch_h);
      p.source = "img" + std::to_string(img.id) + "#" + p.source;
      out.push_back(std::move(p));
    }
  return out;
}

datakit::Dataset build_augmented_dataset(const datakit::Dataset& real,
                                         std::span<const ImageBed> beds,
                                         const std::map<std::string, ClassGenerator>& generators,
                                         const AugmentSpec& spec) {
  return build<true>(real, beds, generators, spec);
}

datakit::Dataset build_augmented_dataset_serial(
    const datakit::Dataset& real, std::span<const ImageBed> beds,
    const std::map<std::string, ClassGenerator>& generators, const AugmentSpec& spec) {
  return build<false>(real, beds, generators, spec);
}

}  // namespace defectforge::augment
