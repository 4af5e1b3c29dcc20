// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "defectforge/common/error.hpp"
#include "defectforge/datakit/formats.hpp"
#include "defectforge/datakit/micro.hpp"
#include "defectforge/detectkit/anchors.hpp"
#include "defectforge/detectkit/detector.hpp"
#include "defectforge/detectkit/nms.hpp"
#include "defectforge/evalkit/metrics.hpp"
#include "doctest.h"
#include "support/eval_oracles.hpp"
#include "support/random_data.hpp"

namespace dt = defectforge::detectkit;
namespace dk = defectforge::datakit;
namespace ek = defectforge::evalkit;
using defectforge::Error;
using defectforge::ErrorKind;
using defectforge::imaging::GrayImage;

namespace {

dt::Detection det(dk::BoundingBox b, double score, std::int64_t image = 0) {
  return {image, "a", b, score};
}

// Images whose only defect is an exact copy of a 7x7 dark ring.
dk::Dataset template_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  dk::Dataset ds;
  ds.classes = {"ring"};
  for (int i = 0; i < 12; ++i) {
    dk::AnnotatedImage img;
    img.id = i;
    img.file = std::to_string(i) + ".png";
    img.width = img.height = 40;
    img.pixels = GrayImage(40, 40);
    for (double& v : img.pixels.pixels) v = 0.5 + noise(rng);
    const int x = oracle::rand_int(rng, 0, 33), y = oracle::rand_int(rng, 0, 33);
    for (int dy = 0; dy < 7; ++dy)
      for (int dx = 0; dx < 7; ++dx)
        if (dx == 0 || dy == 0 || dx == 6 || dy == 6) img.pixels.at(x + dx, y + dy) = 0.15;
    img.annotations.push_back({"ring", {x, y, 7, 7}});
    ds.images.push_back(std::move(img));
  }
  return ds;
}

}  // namespace

TEST_CASE("anchors: hand-placed 2x2 map") {
  const auto a = dt::generate_anchors({}, 2, 2);
  REQUIRE(a.size() == 4);
  const double centers[4][2] = {{8, 8}, {24, 8}, {8, 24}, {24, 24}};
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].width() == 128.0);
    CHECK(a[i].height() == 128.0);
    CHECK((a[i].x0 + a[i].x1) / 2 == centers[i][0]);
    CHECK((a[i].y0 + a[i].y1) / 2 == centers[i][1]);
  }
}

TEST_CASE("anchors: count and ratio") {
  dt::AnchorSpec spec;
  spec.scales = {2, 4, 8};
  spec.ratios = {0.5, 1, 2};
  CHECK(dt::generate_anchors(spec, 4, 4).size() == 144);
  spec.scales = {1};
  spec.ratios = {4};
  const auto a = dt::generate_anchors(spec, 1, 1);
  CHECK(a[0].height() / a[0].width() == doctest::Approx(4.0));
  CHECK(a[0].area() == doctest::Approx(256.0));
}

TEST_CASE("anchors: clipped anchors stay inside the image") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    dt::AnchorSpec spec;
    spec.stride = oracle::rand_int(rng, 4, 32);
    spec.scales = {std::uniform_real_distribution<double>(0.5, 10)(rng)};
    spec.ratios = {0.5, 1.0, 2.0};
    const int fh = oracle::rand_int(rng, 1, 6), fw = oracle::rand_int(rng, 1, 6);
    const dt::ImageBounds bounds{fw * spec.stride, fh * spec.stride};
    const auto anchors = dt::generate_anchors(spec, fh, fw, bounds);
    CHECK(anchors.size() == static_cast<std::size_t>(fh * fw * 3));
    for (const auto& b : anchors) {
      CHECK(b.x0 >= 0.0);
      CHECK(b.y0 >= 0.0);
      CHECK(b.x1 <= bounds.width);
      CHECK(b.y1 <= bounds.height);
    }
  }
}

TEST_CASE("assign_labels: trivial cases") {
  const std::vector<dt::FloatBox> gts{{0, 0, 10, 10}};
  const std::vector<dt::FloatBox> anchors{{0, 0, 10, 10}, {50, 50, 60, 60}};
  const auto l = dt::assign_labels(anchors, gts);
  CHECK(l[0] == dt::AnchorLabel::kPositive);
  CHECK(l[1] == dt::AnchorLabel::kNegative);
}

TEST_CASE("assign_labels: every overlapped ground truth gets a positive") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0, 80), side(2, 30);
  auto random_box = [&] {
    const double x = pos(rng), y = pos(rng);
    return dt::FloatBox{x, y, x + side(rng), y + side(rng)};
  };
  for (int t = 0; t < 300; ++t) {
    std::vector<dt::FloatBox> anchors(static_cast<std::size_t>(oracle::rand_int(rng, 1, 30)));
    std::vector<dt::FloatBox> gts(static_cast<std::size_t>(oracle::rand_int(rng, 0, 4)));
    for (auto& a : anchors) a = random_box();
    for (auto& g : gts) g = random_box();
    const auto labels = dt::assign_labels(anchors, gts);
    REQUIRE(labels.size() == anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      double best = 0.0;
      for (const auto& g : gts) best = std::max(best, dt::iou(anchors[i], g));
      if (best >= 0.7) CHECK(labels[i] == dt::AnchorLabel::kPositive);
      if (labels[i] == dt::AnchorLabel::kNegative) CHECK(best < 0.3);
      if (labels[i] == dt::AnchorLabel::kIgnore) CHECK((best >= 0.3 && best < 0.7));
    }
    for (const auto& g : gts) {
      double best = 0.0;
      for (const auto& a : anchors) best = std::max(best, dt::iou(a, g));
      if (best == 0.0) continue;
      bool has_positive = false;
      for (std::size_t i = 0; i < anchors.size(); ++i)
        has_positive |= labels[i] == dt::AnchorLabel::kPositive && dt::iou(anchors[i], g) == best;
      CHECK(has_positive);
    }
  }
}

TEST_CASE("nms: trivial cases") {
  CHECK(dt::nms(std::vector<dt::Detection>{}, 0.5).empty());
  const std::vector<dt::Detection> one{det({1, 1, 4, 4}, 0.3)};
  CHECK(dt::nms(one, 0.5) == one);
  const std::vector<dt::Detection> two{det({1, 1, 4, 4}, 0.8), det({1, 1, 4, 4}, 0.9)};
  const auto kept = dt::nms(two, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
}

TEST_CASE("nms: equals the quadratic reference on random cases") {
  std::mt19937_64 rng(13);
  const double thresholds[] = {0.0, 0.3, 0.5, 0.7, 1.0};
  for (int t = 0; t < 1000; ++t) {
    const int n = oracle::rand_int(rng, 0, t % 10 == 0 ? 400 : 40);
    std::vector<dt::Detection> dets;
    std::vector<dk::BoundingBox> boxes;
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) {
      const auto b = oracle::random_box(rng, 24, 24);
      const double s = oracle::rand_int(rng, 0, 8) / 8.0;
      dets.push_back(det(b, s, i));
      boxes.push_back(b);
      scores.push_back(s);
    }
    const double thr = t % 7 == 0 ? std::uniform_real_distribution<double>(0, 1)(rng)
                                  : thresholds[t % 5];
    const auto ref = oracle::reference_nms(boxes, scores, thr);
    const auto got = dt::nms(dets, thr);
    const auto serial = dt::nms_serial(dets, thr);
    const auto parallel = dt::nms_parallel(dets, thr);
    REQUIRE(got.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(got[k] == dets[ref[k]]);
    CHECK(serial == got);
    CHECK(parallel == got);
    // Antichain: no kept pair reaches the threshold.
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j)
        CHECK(ek::iou(got[i].box, got[j].box) < thr);
  }
}

TEST_CASE("toy detector: literal templates are found on their own images") {
  const auto ds = template_dataset(3);
  const auto model = dt::train_toy_detector(ds, {});
  const auto dets = dt::detect_all(model, ds);
  const auto report = ek::evaluate(ds, dets);
  CHECK(*report.find("ring")->ap == 1.0);
  CHECK(dets == dt::detect_all_serial(model, ds));
}

TEST_CASE("toy detector: blank image, determinism, loss decrease") {
  dk::MicroConfig mc;
  mc.images_per_class = 12;
  const auto ds = dk::make_micro_dataset(mc, 4);
  dt::ToyDetectorConfig cfg;
  cfg.seed = 9;
  const auto a = dt::train_toy_detector(ds, cfg);
  const auto b = dt::train_toy_detector(ds, cfg);
  CHECK(a.name() == "toy-template");
  CHECK(a.infer(GrayImage(48, 48, 0.5), 0).empty());
  CHECK(dt::detect_all(a, ds) == dt::detect_all(b, ds));
  for (const auto& c : a.classes()) {
    REQUIRE(c.loss_history.size() >= 11);
    for (int e = 0; e < 10; ++e) CHECK(c.loss_history[e + 1] < c.loss_history[e]);
  }
  const auto dets = a.infer(ds.images[0].pixels, 0);
  CHECK(std::is_sorted(dets.begin(), dets.end(),
                       [](const auto& x, const auto& y) { return x.score > y.score; }));

  const auto path = std::filesystem::temp_directory_path() / "df_test_toy.dftd";
  dt::save_toy_detector(path, a);
  const auto c = dt::load_toy_detector(path);
  CHECK(dt::detect_all(c, ds) == dt::detect_all(a, ds));
  std::filesystem::remove(path);
}

TEST_CASE("toy detector: errors") {
  CHECK_THROWS_AS(dt::train_toy_detector(dk::Dataset{}, {}), Error);
  try {
    dt::train_toy_detector(dk::Dataset{}, {});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyDataset);
  }
}

TEST_CASE("import_predictions") {
  const auto dir = std::filesystem::temp_directory_path() / "df_test_preds";
  std::filesystem::create_directories(dir);
  dk::write_text(dir / "empty.json", "[]");
  CHECK(dt::import_predictions(dir / "empty.json").empty());

  dk::Dataset bounds;
  bounds.classes = {"a"};
  bounds.images.push_back({7, "x.png", 20, 10, {}, {}, {}});
  const std::vector<dt::Detection> dets{{7, "a", {1, 2, 3, 4}, 0.25}, {7, "a", {0, 0, 20, 10}, 1.0}};
  dk::write_text(dir / "ok.json", ek::predictions_json(dets));
  CHECK(dt::import_predictions(dir / "ok.json", &bounds) == dets);

  dk::write_text(dir / "oob.json", ek::predictions_json(std::vector<dt::Detection>{
                                       {7, "a", {15, 0, 6, 4}, 0.5}}));
  try {
    dt::import_predictions(dir / "oob.json", &bounds);
    FAIL("expected InvalidBox");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidBox);
    CHECK(std::string(e.what()).find("image 7") != std::string::npos);
  }
  dk::write_text(dir / "score.json", ek::predictions_json(std::vector<dt::Detection>{
                                         {7, "a", {1, 1, 2, 2}, 1.5}}));
  try {
    dt::import_predictions(dir / "score.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParseError);
  }
  dk::write_text(dir / "bad.json", "{");
  CHECK_THROWS_AS(dt::import_predictions(dir / "bad.json"), Error);
  std::filesystem::remove_all(dir);
}
