// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>

#include "defectforge/common/error.hpp"
#include "json.hpp"

namespace defectforge::evalkit {

using nlohmann::json;
using nlohmann::ordered_json;

double iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t iw = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const std::int64_t ih = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const std::int64_t inter = iw * ih;
  const std::int64_t uni = std::int64_t{a.w} * a.h + std::int64_t{b.w} * b.h - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<char> match_detections(std::span<const BoundingBox> gts,
                                   std::span<const BoundingBox> dets, double iou_threshold) {
  std::vector<char> taken(gts.size(), 0), flags(dets.size(), 0);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double o = iou(dets[d], gts[g]);
      if (o >= iou_threshold && o > best) {
        best = o;
        best_gt = g;
      }
    }
    if (best_gt < gts.size()) {
      taken[best_gt] = 1;
      flags[d] = 1;
    }
  }
  return flags;
}

const char* to_string(ApMode mode) {
  switch (mode) {
    case ApMode::kRaw: return "raw";
    case ApMode::kElevenPoint: return "11point";
    case ApMode::kEnvelope: return "envelope";
  }
  return "raw";
}

ApMode parse_ap_mode(const std::string& text) {
  if (text == "raw") return ApMode::kRaw;
  if (text == "11point") return ApMode::kElevenPoint;
  if (text == "envelope") return ApMode::kEnvelope;
  fail(ErrorKind::kConfigInvalid, "unknown AP mode '" + text + "' (raw, 11point, envelope)");
}

std::vector<PrPoint> pr_curve(std::span<const char> flags, std::size_t num_gt) {
  if (num_gt == 0) fail(ErrorKind::kNoGroundTruth, "precision-recall needs ground truth");
  std::vector<PrPoint> curve;
  curve.reserve(flags.size());
  std::size_t tp = 0;
  double prev_recall = 0.0;
  for (std::size_t k = 1; k <= flags.size(); ++k) {
    tp += flags[k - 1] ? 1 : 0;
    const double p = static_cast<double>(tp) / static_cast<double>(k);
    const double r = static_cast<double>(tp) / static_cast<double>(num_gt);
    curve.push_back({k, p, r, r - prev_recall});
    prev_recall = r;
  }
  return curve;
}

double average_precision(std::span<const char> flags, std::size_t num_gt, ApMode mode) {
  const std::vector<PrPoint> curve = pr_curve(flags, num_gt);
  double ap = 0.0;
  switch (mode) {
    case ApMode::kRaw:
      for (const auto& pt : curve) ap += pt.precision * pt.delta_recall;
      break;
    case ApMode::kEnvelope: {
      double envelope = 0.0;
      std::vector<double> p(curve.size());
      for (std::size_t i = curve.size(); i-- > 0;) {
        envelope = std::max(envelope, curve[i].precision);
        p[i] = envelope;
      }
      for (std::size_t i = 0; i < curve.size(); ++i) ap += p[i] * curve[i].delta_recall;
      break;
    }
    case ApMode::kElevenPoint:
      for (int t = 0; t <= 10; ++t) {
        const double level = t / 10.0;
        double best = 0.0;
        for (const auto& pt : curve)
          if (pt.recall >= level) best = std::max(best, pt.precision);
        ap += best / 11.0;
      }
      break;
  }
  return ap;
}

double mean_ap(std::span<const double> aps) {
  if (aps.empty()) fail(ErrorKind::kEmptyClassSet, "mAP needs at least one class with an AP");
  double sum = 0.0;
  for (double a : aps) sum += a;
  return sum / static_cast<double>(aps.size());
}

const ClassResult* EvalReport::find(const std::string& label) const {
  for (const auto& c : classes)
    if (c.class_label == label) return &c;
  return nullptr;
}

namespace {

// Detection indices of one class, ranked by descending score with input
// order kept on ties.
std::vector<std::size_t> ranked(std::span<const Detection> dets, const std::string& label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].class_label == label) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return idx;
}

std::vector<BoundingBox> truth_boxes(const datakit::AnnotatedImage& img, const std::string& label) {
  std::vector<BoundingBox> out;
  for (const auto& a : img.annotations)
    if (a.class_label == label) out.push_back(a.box);
  return out;
}

void check_inputs(std::span<const Detection> dets) {
  for (const auto& d : dets)
    if (!std::isfinite(d.score))
      fail(ErrorKind::kInvalidBox,
           "image " + std::to_string(d.image_id) + ": detection score is not finite");
}

ClassResult summarize(const std::string& label, std::size_t num_gt,
                      const std::vector<char>& ranked_flags, const EvalConfig& config) {
  ClassResult r;
  r.class_label = label;
  r.num_gt = num_gt;
  for (char f : ranked_flags) (f ? r.tp : r.fp) += 1;
  r.fn = num_gt - r.tp;
  if (num_gt > 0) r.ap = average_precision(ranked_flags, num_gt, config.mode);
  return r;
}

EvalReport finish(std::vector<ClassResult> classes, const EvalConfig& config) {
  EvalReport report;
  report.classes = std::move(classes);
  report.iou_threshold = config.iou_threshold;
  report.mode = config.mode;
  std::vector<double> aps;
  for (const auto& c : report.classes)
    if (c.ap) aps.push_back(*c.ap);
  report.class_count = aps.size();
  report.map = mean_ap(aps);
  return report;
}

}  // namespace

EvalReport evaluate_serial(const datakit::Dataset& truth, std::span<const Detection> dets,
                           const EvalConfig& config) {
  check_inputs(dets);
  std::vector<ClassResult> results;
  for (const auto& label : truth.classes) {
    std::map<std::int64_t, std::vector<BoundingBox>> gts;
    std::map<std::int64_t, std::vector<char>> taken;
    std::size_t num_gt = 0;
    for (const auto& img : truth.images) {
      gts[img.id] = truth_boxes(img, label);
      taken[img.id].assign(gts[img.id].size(), 0);
      num_gt += gts[img.id].size();
    }
    std::vector<char> flags;
    for (std::size_t i : ranked(dets, label)) {
      const Detection& d = dets[i];
      const auto& boxes = gts[d.image_id];
      auto& used = taken[d.image_id];
      used.resize(boxes.size(), 0);
      double best = -1.0;
      std::size_t best_gt = boxes.size();
      for (std::size_t g = 0; g < boxes.size(); ++g) {
        const double o = iou(d.box, boxes[g]);
        if (!used[g] && o >= config.iou_threshold && o > best) {
          best = o;
          best_gt = g;
        }
      }
      if (best_gt < boxes.size()) used[best_gt] = 1;
      flags.push_back(best_gt < boxes.size() ? 1 : 0);
    }
    results.push_back(summarize(label, num_gt, flags, config));
  }
  return finish(std::move(results), config);
}

EvalReport evaluate(const datakit::Dataset& truth, std::span<const Detection> dets,
                    const EvalConfig& config) {
  check_inputs(dets);
  std::map<std::int64_t, std::size_t> image_index;
  for (std::size_t i = 0; i < truth.images.size(); ++i) image_index[truth.images[i].id] = i;

  struct Work {
    std::size_t class_index;
    std::int64_t image_id;
    std::vector<std::size_t> dets;  // rank order within the image
  };
  std::vector<std::vector<std::size_t>> class_ranks(truth.classes.size());
  std::vector<Work> work;
  for (std::size_t c = 0; c < truth.classes.size(); ++c) {
    class_ranks[c] = ranked(dets, truth.classes[c]);
    std::map<std::int64_t, std::vector<std::size_t>> per_image;
    for (std::size_t i : class_ranks[c]) per_image[dets[i].image_id].push_back(i);
    for (auto& [id, list] : per_image) work.push_back({c, id, std::move(list)});
  }

  std::vector<char> flag_of(dets.size(), 0);
  const auto n = static_cast<std::int64_t>(work.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t w = 0; w < n; ++w) {
    const Work& item = work[static_cast<std::size_t>(w)];
    const auto it = image_index.find(item.image_id);
    if (it == image_index.end()) continue;
    const auto gts = truth_boxes(truth.images[it->second], truth.classes[item.class_index]);
    std::vector<BoundingBox> boxes;
    for (std::size_t i : item.dets) boxes.push_back(dets[i].box);
    const auto flags = match_detections(gts, boxes, config.iou_threshold);
    for (std::size_t k = 0; k < item.dets.size(); ++k) flag_of[item.dets[k]] = flags[k];
  }

  std::vector<ClassResult> results;
  for (std::size_t c = 0; c < truth.classes.size(); ++c) {
    std::size_t num_gt = 0;
    for (const auto& img : truth.images) num_gt += truth_boxes(img, truth.classes[c]).size();
    std::vector<char> flags;
    for (std::size_t i : class_ranks[c]) flags.push_back(flag_of[i]);
    results.push_back(summarize(truth.classes[c], num_gt, flags, config));
  }
  return finish(std::move(results), config);
}

std::string report_json(const EvalReport& report) {
  ordered_json j;
  j["map"] = report.map;
  j["class_count"] = report.class_count;
  j["iou_threshold"] = report.iou_threshold;
  j["ap_mode"] = to_string(report.mode);
  j["classes"] = ordered_json::array();
  for (const auto& c : report.classes)
    j["classes"].push_back({{"class", c.class_label},
                            {"ap", c.ap ? ordered_json(*c.ap) : ordered_json(nullptr)},
                            {"num_gt", c.num_gt},
                            {"tp", c.tp},
                            {"fp", c.fp},
                            {"fn", c.fn}});
  return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "class,ap,tp,fp,fn\n" << std::setprecision(17);
  for (const auto& c : report.classes) {
    out << c.class_label << ',';
    if (c.ap) out << *c.ap;
    else out << "NA";
    out << ',' << c.tp << ',' << c.fp << ',' << c.fn << '\n';
  }
}

std::string predictions_json(std::span<const Detection> dets) {
  ordered_json j = ordered_json::array();
  for (const auto& d : dets)
    j.push_back({{"image_id", d.image_id},
                 {"class", d.class_label},
                 {"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}},
                 {"score", d.score}});
  return j.dump(2) + "\n";
}

std::vector<Detection> parse_predictions_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParseError, origin + ": " + e.what());
  }
  if (!j.is_array()) fail(ErrorKind::kParseError, origin + ": predictions must be a JSON array");
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + ": predictions[" + std::to_string(i) + "]";
    try {
      const auto& e = j[i];
      Detection d;
      d.image_id = e.at("image_id").get<std::int64_t>();
      d.class_label = e.at("class").get<std::string>();
      const auto b = e.at("bbox").get<std::vector<int>>();
      if (b.size() != 4) fail(ErrorKind::kParseError, where + ": bbox needs four integers");
      d.box = {b[0], b[1], b[2], b[3]};
      d.score = e.at("score").get<double>();
      dets.push_back(std::move(d));
    } catch (const json::exception& e) {
      fail(ErrorKind::kParseError, where + ": " + e.what());
    }
  }
  return dets;
}

}  // namespace defectforge::evalkit
