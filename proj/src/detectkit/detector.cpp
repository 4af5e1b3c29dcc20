// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/detectkit/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"
#include "defectforge/datakit/formats.hpp"
#include "defectforge/detectkit/nms.hpp"
#include "defectforge/ndgrad/ops.hpp"
#include "json.hpp"

namespace defectforge::detectkit {

namespace ng = ndgrad;
using datakit::BoundingBox;
using ng::Tensor;
using imaging::GrayImage;
using nlohmann::json;

namespace {

constexpr std::string_view kModelMagic = "DFTD";

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
};

WindowStats stats(const GrayImage& img, int x, int y, int w, int h) {
  double s = 0.0, s2 = 0.0;
  for (int r = y; r < y + h; ++r)
    for (int c = x; c < x + w; ++c) {
      const double v = img.at(c, r);
      s += v;
      s2 += v * v;
    }
  const double n = static_cast<double>(w) * h;
  const double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean))};
}

// The window plus a context ring of half its side on every edge, sampled
// bilinearly onto a t x t grid (image borders are clamped), normalized to
// zero mean and unit deviation (with a floor on the deviation), and
// followed by a constant 1 for the bias.
std::vector<double> window_features(const GrayImage& img, const BoundingBox& b, int t,
                                    double min_contrast) {
  const double cw = b.w * 2.0, ch = b.h * 2.0;
  const double x0 = b.x - b.w * 0.5, y0 = b.y - b.h * 0.5;
  std::vector<double> f(static_cast<std::size_t>(t * t) + 1, 1.0);
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < t; ++r) {
    const double fy = std::clamp(y0 + (r + 0.5) * ch / t - 0.5, 0.0, img.height - 1.0);
    const int ya = static_cast<int>(fy);
    const int yb = std::min(ya + 1, img.height - 1);
    const double ty = fy - ya;
    for (int c = 0; c < t; ++c) {
      const double fx = std::clamp(x0 + (c + 0.5) * cw / t - 0.5, 0.0, img.width - 1.0);
      const int xa = static_cast<int>(fx);
      const int xb = std::min(xa + 1, img.width - 1);
      const double tx = fx - xa;
      const double v = (img.at(xa, ya) * (1 - tx) + img.at(xb, ya) * tx) * (1 - ty) +
                       (img.at(xa, yb) * (1 - tx) + img.at(xb, yb) * tx) * ty;
      f[static_cast<std::size_t>(r * t + c)] = v;
      s += v;
      s2 += v * v;
    }
  }
  const double n = static_cast<double>(t) * t;
  const double mean = s / n;
  const double dev = std::max(min_contrast, std::sqrt(std::max(0.0, s2 / n - mean * mean)));
  for (std::size_t i = 0; i + 1 < f.size(); ++i) f[i] = (f[i] - mean) / dev;
  return f;
}

std::vector<WindowShape> fit_shapes(const std::vector<BoundingBox>& boxes) {
  // Two-means over (w, h), seeded with the flattest and the tallest box.
  auto aspect = [](const BoundingBox& b) { return static_cast<double>(b.h) / b.w; };
  auto area = [](const BoundingBox& b) { return static_cast<double>(b.w) * b.h; };
  const auto [flat, tall] = std::minmax_element(
      boxes.begin(), boxes.end(), [&](const BoundingBox& a, const BoundingBox& b) {
        return aspect(a) < aspect(b) || (aspect(a) == aspect(b) && area(a) < area(b));
      });
  BoundingBox lo = *flat, hi = *tall;
  if (aspect(lo) == aspect(hi)) {
    const auto [small, big] = std::minmax_element(
        boxes.begin(), boxes.end(),
        [&](const BoundingBox& a, const BoundingBox& b) { return area(a) < area(b); });
    lo = *small;
    hi = *big;
  }
  std::array<std::array<double, 2>, 2> centers{{{double(lo.w), double(lo.h)},
                                                {double(hi.w), double(hi.h)}}};
  for (int iter = 0; iter < 20; ++iter) {
    std::array<std::array<double, 3>, 2> acc{};
    for (const auto& b : boxes) {
      const auto d = [&](int k) {
        return std::hypot(b.w - centers[k][0], b.h - centers[k][1]);
      };
      const int k = d(1) < d(0) ? 1 : 0;
      acc[k][0] += b.w;
      acc[k][1] += b.h;
      acc[k][2] += 1.0;
    }
    for (int k = 0; k < 2; ++k)
      if (acc[k][2] > 0) centers[k] = {acc[k][0] / acc[k][2], acc[k][1] / acc[k][2]};
  }
  std::vector<WindowShape> shapes;
  for (const auto& c : centers) {
    const WindowShape s{std::max(1, static_cast<int>(std::lround(c[0]))),
                        std::max(1, static_cast<int>(std::lround(c[1])))};
    if (std::find(shapes.begin(), shapes.end(), s) == shapes.end()) shapes.push_back(s);
  }
  return shapes;
}

bool overlaps_any(const BoundingBox& b, const std::vector<BoundingBox>& others, double limit) {
  return std::any_of(others.begin(), others.end(),
                     [&](const BoundingBox& o) { return evalkit::iou(b, o) >= limit; });
}

struct Samples {
  std::vector<double> features;  // row-major, n x (t*t + 1)
  std::vector<double> labels;    // +1 / -1
  std::size_t rows = 0;

  void add(std::vector<double> f, double label) {
    features.insert(features.end(), f.begin(), f.end());
    labels.push_back(label);
    ++rows;
  }
};

Samples collect_samples(const datakit::Dataset& train, const std::string& label,
                        const std::vector<WindowShape>& shapes, const ToyDetectorConfig& cfg) {
  const int t = cfg.template_size;
  Samples s;
  Rng rng = make_rng(cfg.seed, "detectkit.toy.negatives", fnv1a64(label));
  for (const auto& img : train.images) {
    if (img.pixels.empty())
      fail(ErrorKind::kConfigInvalid, "toy detector training needs pixels for " + img.file);
    std::vector<BoundingBox> own;
    for (const auto& a : img.annotations) {
      if (a.class_label != label) {
        s.add(window_features(img.pixels, a.box, t, cfg.min_contrast), -1.0);
        for (const auto& shape : shapes)
          for (int n = 0; n < 3; ++n) {
            const int x0 = std::max(0, a.box.x - shape.w + 1);
            const int x1 = std::min(img.width - shape.w, a.box.right() - 1);
            const int y0 = std::max(0, a.box.y - shape.h + 1);
            const int y1 = std::min(img.height - shape.h, a.box.bottom() - 1);
            if (x0 > x1 || y0 > y1) break;
            const BoundingBox b{std::uniform_int_distribution<int>(x0, x1)(rng),
                                std::uniform_int_distribution<int>(y0, y1)(rng), shape.w, shape.h};
            s.add(window_features(img.pixels, b, t, cfg.min_contrast), -1.0);
          }
        continue;
      }
      own.push_back(a.box);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const BoundingBox j{a.box.x + dx, a.box.y + dy, a.box.w, a.box.h};
          if (j.inside(img.width, img.height))
            s.add(window_features(img.pixels, j, t, cfg.min_contrast), 1.0);
        }
    }
    // Half-offset windows teach the template to localize.
    for (const auto& b : own) {
      const std::array<std::array<int, 2>, 4> offsets{
          {{-(b.w + 1) / 2, 0}, {(b.w + 1) / 2, 0}, {0, -(b.h + 1) / 2}, {0, (b.h + 1) / 2}}};
      for (const auto& o : offsets) {
        const BoundingBox shifted{b.x + o[0], b.y + o[1], b.w, b.h};
        if (shifted.inside(img.width, img.height) && !overlaps_any(shifted, own, 0.5))
          s.add(window_features(img.pixels, shifted, t, cfg.min_contrast), -1.0);
      }
    }
    for (int n = 0; n < cfg.negatives_per_image; ++n)
      for (int attempt = 0; attempt < 20; ++attempt) {
        const WindowShape& shape = shapes[std::uniform_int_distribution<std::size_t>(
            0, shapes.size() - 1)(rng)];
        if (shape.w > img.width || shape.h > img.height) break;
        const BoundingBox b{std::uniform_int_distribution<int>(0, img.width - shape.w)(rng),
                            std::uniform_int_distribution<int>(0, img.height - shape.h)(rng),
                            shape.w, shape.h};
        if (overlaps_any(b, own, 0.3)) continue;
        if (stats(img.pixels, b.x, b.y, b.w, b.h).stddev < cfg.min_contrast) continue;
        s.add(window_features(img.pixels, b, t, cfg.min_contrast), -1.0);
        break;
      }
  }
  return s;
}

// Every window of the template's shapes that passes the contrast test,
// scored by the logistic template.
std::vector<Detection> score_windows(const GrayImage& image, std::int64_t image_id,
                                     const ClassTemplate& c, const ToyDetectorConfig& cfg,
                                     double threshold) {
  std::vector<Detection> found;
  const int stride = std::max(1, cfg.window_stride);
  for (const auto& shape : c.shapes) {
    if (shape.w > image.width || shape.h > image.height) continue;
    for (int y = 0; y + shape.h <= image.height; y += stride)
      for (int x = 0; x + shape.w <= image.width; x += stride) {
        if (stats(image, x, y, shape.w, shape.h).stddev < cfg.min_contrast) continue;
        const BoundingBox box{x, y, shape.w, shape.h};
        const auto f = window_features(image, box, cfg.template_size, cfg.min_contrast);
        const double z = std::inner_product(f.begin(), f.end(), c.weights.begin(), 0.0);
        const double score = 1.0 / (1.0 + std::exp(-z));
        if (score >= threshold) found.push_back({image_id, c.class_label, box, score});
      }
  }
  return found;
}

// Largest eigenvalue of sum_i w_i x_i x_i^T by power iteration.
double top_eigenvalue(const Samples& s, const std::vector<double>& weight, std::size_t d) {
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d))), next(d);
  double lambda = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < s.rows; ++i) {
      const double* x = s.features.data() + i * d;
      const double proj = weight[i] * std::inner_product(x, x + d, v.begin(), 0.0);
      for (std::size_t k = 0; k < d; ++k) next[k] += proj * x[k];
    }
    const double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t k = 0; k < d; ++k) v[k] = next[k] / norm;
  }
  return lambda;
}

// Full-batch gradient descent on the weighted logistic loss.
void fit_template(ClassTemplate& tpl, const Samples& s, const ToyDetectorConfig& cfg) {
  const std::size_t d = static_cast<std::size_t>(cfg.template_size * cfg.template_size) + 1;

  // Positives and negatives carry half of the total weight each.
  const auto n_pos = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), 1.0));
  const double n_neg = static_cast<double>(s.rows) - n_pos;
  std::vector<double> weight(s.rows);
  for (std::size_t i = 0; i < s.rows; ++i)
    weight[i] = s.labels[i] > 0 ? 0.5 / n_pos : (n_neg > 0 ? 0.5 / n_neg : 0.0);

  // The logistic loss is (lambda_max / 4 + l2)-smooth; a step of the inverse
  // of that bound decreases the loss every epoch.
  const double smooth = 0.25 * top_eigenvalue(s, weight, d) * 1.05 + cfg.l2;
  const double step = 1.0 / smooth;

  const Tensor x({s.rows, d}, s.features);
  const Tensor signed_weight({s.rows, 1}, [&] {
    std::vector<double> v(s.rows);
    for (std::size_t i = 0; i < s.rows; ++i) v[i] = -s.labels[i];
    return v;
  }());
  const Tensor w_col({s.rows, 1}, weight);
  std::vector<double> decay_mask(d, 1.0);
  decay_mask.back() = 0.0;
  const Tensor mask({d, 1}, decay_mask);

  std::vector<double> theta(d, 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ng::Tape tape;
    const Tensor th = tape.leaf(Tensor({d, 1}, theta));
    const Tensor margins = ng::mul(ng::matmul(x, th), signed_weight);
    const Tensor data_loss = ng::sum(ng::mul(ng::softplus(margins), w_col));
    const Tensor reg = ng::scale(ng::sum(ng::square(ng::mul(th, mask))), 0.5 * cfg.l2);
    const Tensor loss = ng::add(data_loss, reg);
    const Tensor g = ng::grad(loss, std::span(&th, 1))[0];
    tpl.loss_history.push_back(loss.item());
    for (std::size_t k = 0; k < d; ++k) theta[k] -= step * g[k];
  }
  tpl.weights = theta;
}

ClassTemplate train_class(const datakit::Dataset& train, const std::string& label,
                          const ToyDetectorConfig& cfg) {
  std::vector<BoundingBox> boxes;
  for (const auto& img : train.images)
    for (const auto& a : img.annotations)
      if (a.class_label == label) boxes.push_back(a.box);
  ClassTemplate tpl;
  tpl.class_label = label;
  const std::size_t d = static_cast<std::size_t>(cfg.template_size * cfg.template_size) + 1;
  tpl.weights.assign(d, 0.0);
  if (boxes.empty()) {
    tpl.shapes = {{cfg.template_size, cfg.template_size}};
    tpl.weights.back() = -20.0;
    return tpl;
  }
  tpl.shapes = fit_shapes(boxes);
  Samples s = collect_samples(train, label, tpl.shapes, cfg);
  fit_template(tpl, s, cfg);

  for (int round = 0; round < cfg.hard_negative_rounds; ++round) {
    // Retrain from scratch with the highest-scoring false windows added.
    for (const auto& img : train.images) {
      std::vector<BoundingBox> own;
      for (const auto& a : img.annotations)
        if (a.class_label == label) own.push_back(a.box);
      auto found = score_windows(img.pixels, img.id, tpl, cfg, 0.5);
      std::erase_if(found, [&](const Detection& d) { return overlaps_any(d.box, own, 0.3); });
      const auto kept = nms(found, cfg.nms_iou);
      for (std::size_t k = 0; k < kept.size() && k < static_cast<std::size_t>(cfg.negatives_per_image); ++k)
        s.add(window_features(img.pixels, kept[k].box, cfg.template_size, cfg.min_contrast), -1.0);
    }
    tpl.loss_history.clear();
    fit_template(tpl, s, cfg);
  }
  return tpl;
}

}  // namespace

ToyDetector::ToyDetector(ToyDetectorConfig config, std::vector<ClassTemplate> classes)
    : config_(config), classes_(std::move(classes)) {
  const auto d = static_cast<std::size_t>(config_.template_size * config_.template_size) + 1;
  for (const auto& c : classes_)
    if (c.weights.size() != d || c.shapes.empty())
      fail(ErrorKind::kShapeMismatch, "template for '" + c.class_label + "' has the wrong size");
}

std::vector<Detection> ToyDetector::infer(const GrayImage& image, std::int64_t image_id) const {
  std::vector<Detection> out;
  for (const auto& c : classes_) {
    auto kept = nms(score_windows(image, image_id, c, config_, config_.score_threshold),
                    config_.nms_iou);
    if (kept.size() > config_.max_per_class) kept.resize(config_.max_per_class);
    out.insert(out.end(), kept.begin(), kept.end());
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

ToyDetector train_toy_detector(const datakit::Dataset& train, const ToyDetectorConfig& config) {
  if (train.classes.empty() || train.images.empty())
    fail(ErrorKind::kEmptyDataset, "toy detector needs at least one class and one image");
  if (config.template_size < 2 || config.epochs < 0)
    fail(ErrorKind::kConfigInvalid, "toy detector needs template_size >= 2 and epochs >= 0");
  std::vector<ClassTemplate> classes;
  for (const auto& label : train.classes) classes.push_back(train_class(train, label, config));
  return ToyDetector(config, std::move(classes));
}

std::vector<Detection> detect_all_serial(const DetectorModel& model, const datakit::Dataset& ds) {
  std::vector<Detection> all;
  for (const auto& img : ds.images) {
    const auto found = model.infer(img.pixels, img.id);
    all.insert(all.end(), found.begin(), found.end());
  }
  return all;
}

std::vector<Detection> detect_all(const DetectorModel& model, const datakit::Dataset& ds) {
  std::vector<std::vector<Detection>> per_image(ds.images.size());
  const auto n = static_cast<std::int64_t>(ds.images.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& img = ds.images[static_cast<std::size_t>(i)];
    per_image[static_cast<std::size_t>(i)] = model.infer(img.pixels, img.id);
  }
  std::vector<Detection> all;
  for (auto& v : per_image) all.insert(all.end(), v.begin(), v.end());
  return all;
}

void save_toy_detector(const std::filesystem::path& path, const ToyDetector& model) {
  const auto& c = model.config();
  json classes = json::array();
  ng::ParamSet params;
  for (std::size_t i = 0; i < model.classes().size(); ++i) {
    const auto& tpl = model.classes()[i];
    json shapes = json::array();
    for (const auto& s : tpl.shapes) shapes.push_back({s.w, s.h});
    classes.push_back({{"class", tpl.class_label}, {"shapes", shapes}});
    params.add("template" + std::to_string(i), Tensor({tpl.weights.size()}, tpl.weights));
  }
  const json descriptor = {{"kind", "toy-detector"},
                           {"template_size", c.template_size},
                           {"epochs", c.epochs},
                           {"l2", c.l2},
                           {"negatives_per_image", c.negatives_per_image},
                           {"hard_negative_rounds", c.hard_negative_rounds},
                           {"window_stride", c.window_stride},
                           {"min_contrast", c.min_contrast},
                           {"score_threshold", c.score_threshold},
                           {"nms_iou", c.nms_iou},
                           {"max_per_class", c.max_per_class},
                           {"seed", c.seed},
                           {"classes", classes}};
  ng::write_model_file(path, kModelMagic, descriptor.dump(), params);
}

ToyDetector load_toy_detector(const std::filesystem::path& path) {
  const ng::ModelFile file = ng::read_model_file(path, kModelMagic);
  try {
    const json j = json::parse(file.descriptor);
    ToyDetectorConfig c;
    c.template_size = j.at("template_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.l2 = j.at("l2").get<double>();
    c.negatives_per_image = j.at("negatives_per_image").get<int>();
    c.hard_negative_rounds = j.at("hard_negative_rounds").get<int>();
    c.window_stride = j.at("window_stride").get<int>();
    c.min_contrast = j.at("min_contrast").get<double>();
    c.score_threshold = j.at("score_threshold").get<double>();
    c.nms_iou = j.at("nms_iou").get<double>();
    c.max_per_class = j.at("max_per_class").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    std::vector<ClassTemplate> classes;
    const json& cls = j.at("classes");
    for (std::size_t i = 0; i < cls.size(); ++i) {
      ClassTemplate tpl;
      tpl.class_label = cls[i].at("class").get<std::string>();
      for (const auto& s : cls[i].at("shapes"))
        tpl.shapes.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
      tpl.weights = file.params.get("template" + std::to_string(i)).to_vector();
      classes.push_back(std::move(tpl));
    }
    return ToyDetector(c, std::move(classes));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParseError, path.string() + ": bad descriptor: " + e.what());
  }
}

void validate_predictions(const std::vector<Detection>& dets, const datakit::Dataset* bounds) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto& d = dets[i];
    const std::string who = "prediction " + std::to_string(i) + " (image " +
                            std::to_string(d.image_id) + ")";
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0)
      fail(ErrorKind::kParseError, who + ": score outside [0, 1]");
    if (!d.box.valid())
      fail(ErrorKind::kInvalidBox, who + ": invalid box " + datakit::to_string(d.box));
    if (bounds == nullptr) continue;
    const auto* img = bounds->find(d.image_id);
    if (img == nullptr) fail(ErrorKind::kInvalidBox, who + ": unknown image id");
    if (!d.box.inside(img->width, img->height))
      fail(ErrorKind::kInvalidBox, who + ": box " + datakit::to_string(d.box) + " outside " +
                                       std::to_string(img->width) + "x" +
                                       std::to_string(img->height));
  }
}

std::vector<Detection> import_predictions(const std::filesystem::path& path,
                                          const datakit::Dataset* bounds) {
  auto dets = evalkit::parse_predictions_json(datakit::read_text(path), path.string());
  validate_predictions(dets, bounds);
  return dets;
}

}  // namespace defectforge::detectkit
