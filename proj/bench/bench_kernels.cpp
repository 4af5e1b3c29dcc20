// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP variant for every parallel kernel.

#include <benchmark/benchmark.h>

#include <random>
#include <thread>
#include <vector>

#include "defectforge/augment/augment.hpp"
#include "defectforge/datakit/micro.hpp"
#include "defectforge/detectkit/detector.hpp"
#include "defectforge/detectkit/nms.hpp"
#include "defectforge/evalkit/metrics.hpp"
#include "defectforge/evalkit/sensitivity.hpp"
#include "defectforge/kernels/linalg.hpp"

namespace df = defectforge;
using df::evalkit::Detection;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <bool kParallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (kParallel)
      df::kernels::matmul_parallel(a, b, c, n, n, n);
    else
      df::kernels::matmul_serial(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}

std::vector<Detection> random_detections(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pos(0, 400), side(5, 60);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<Detection> dets(n);
  for (auto& d : dets) d = {0, "a", {pos(rng), pos(rng), side(rng), side(rng)}, score(rng)};
  return dets;
}

template <bool kParallel>
void BM_Nms(benchmark::State& state) {
  const auto dets = random_detections(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto kept = kParallel ? df::detectkit::nms_parallel(dets, 0.5)
                          : df::detectkit::nms_serial(dets, 0.5);
    benchmark::DoNotOptimize(kept.data());
  }
}

struct EvalFixture {
  df::datakit::Dataset truth;
  std::vector<Detection> dets;
  EvalFixture() {
    df::datakit::MicroConfig mc;
    mc.images_per_class = 200;
    truth = df::datakit::make_micro_dataset(mc, 3);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> jitter(-2, 2);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (const auto& img : truth.images)
      for (const auto& a : img.annotations)
        for (int k = 0; k < 5; ++k) {
          auto box = a.box;
          box.x = std::max(0, box.x + jitter(rng));
          box.y = std::max(0, box.y + jitter(rng));
          dets.push_back({img.id, a.class_label, box, score(rng)});
        }
  }
};

template <bool kParallel>
void BM_Evaluate(benchmark::State& state) {
  static const EvalFixture fx;
  for (auto _ : state) {
    auto r = kParallel ? df::evalkit::evaluate(fx.truth, fx.dets)
                       : df::evalkit::evaluate_serial(fx.truth, fx.dets);
    benchmark::DoNotOptimize(r.map);
  }
}

struct AugmentFixture {
  df::datakit::Dataset real;
  std::vector<df::augment::ImageBed> beds;
  AugmentFixture() {
    df::datakit::MicroConfig mc;
    mc.images_per_class = 20;
    real = df::datakit::make_micro_dataset(mc, 1);
    for (const auto& img : df::datakit::make_micro_beds(mc, 10, 2)) beds.push_back({img, "bed"});
  }
};

template <bool kParallel>
void BM_Augment(benchmark::State& state) {
  static const AugmentFixture fx;
  df::augment::AugmentSpec spec;
  spec.m_g = static_cast<std::size_t>(state.range(0));
  const std::map<std::string, df::augment::ClassGenerator> none;
  for (auto _ : state) {
    auto ds = kParallel ? df::augment::build_augmented_dataset(fx.real, fx.beds, none, spec)
                        : df::augment::build_augmented_dataset_serial(fx.real, fx.beds, none, spec);
    benchmark::DoNotOptimize(ds.images.data());
  }
}

template <bool kParallel>
void BM_Detect(benchmark::State& state) {
  static const AugmentFixture fx;
  static const auto model = [] {
    df::detectkit::ToyDetectorConfig cfg;
    cfg.epochs = 20;
    return df::detectkit::train_toy_detector(fx.real, cfg);
  }();
  for (auto _ : state) {
    auto dets = kParallel ? df::detectkit::detect_all(model, fx.real)
                          : df::detectkit::detect_all_serial(model, fx.real);
    benchmark::DoNotOptimize(dets.data());
  }
}

// jobs = 1 is the serial reference schedule.
void BM_Sensitivity(benchmark::State& state) {
  df::evalkit::GridSpec spec{{1, 2, 3, 4, 5}, {0, 1, 2, 3, 4}, 3, 0};
  const auto cell = [](std::size_t m_r, std::size_t m_g, std::size_t, std::uint64_t seed) {
    const auto v = random_values(20000, seed);
    double s = 0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(m_r + m_g + 1);
  };
  for (auto _ : state) {
    auto grid = df::evalkit::run_sensitivity(spec, cell, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(grid.cells.data());
  }
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul<true>)->Name("matmul/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_Nms<false>)->Name("nms/serial")->Arg(500)->Arg(4000);
BENCHMARK(BM_Nms<true>)->Name("nms/omp")->Arg(500)->Arg(4000);
BENCHMARK(BM_Evaluate<false>)->Name("evaluate/serial");
BENCHMARK(BM_Evaluate<true>)->Name("evaluate/omp");
BENCHMARK(BM_Augment<false>)->Name("augment/serial")->Arg(200);
BENCHMARK(BM_Augment<true>)->Name("augment/omp")->Arg(200);
BENCHMARK(BM_Detect<false>)->Name("detect/serial");
BENCHMARK(BM_Detect<true>)->Name("detect/omp");
BENCHMARK(BM_Sensitivity)->Name("sensitivity/jobs")->Arg(1)->Arg(0)->UseRealTime();

BENCHMARK_MAIN();
