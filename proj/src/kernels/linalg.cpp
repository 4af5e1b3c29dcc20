// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/kernels/linalg.hpp"

#include <algorithm>
#include <cstdint>

namespace defectforge::kernels {

namespace {

constexpr std::size_t kParallelFlops = std::size_t{1} << 18;

inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t inner, std::size_t cols) {
  std::fill(c, c + cols, 0.0);
  for (std::size_t k = 0; k < inner; ++k) {
    const double aik = a[k];
    const double* brow = b + k * cols;
    for (std::size_t j = 0; j < cols; ++j) c[j] += aik * brow[j];
  }
}

}  // namespace

void matmul_serial(std::span<const double> a, std::span<const double> b,
                   std::span<double> c, std::size_t rows, std::size_t inner,
                   std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    matmul_row(a.data() + i * inner, b.data(), c.data() + i * cols, inner,
               cols);
}

void matmul_parallel(std::span<const double> a, std::span<const double> b,
                     std::span<double> c, std::size_t rows, std::size_t inner,
                     std::size_t cols) {
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    matmul_row(a.data() + r * inner, b.data(), c.data() + r * cols, inner,
               cols);
  }
}

void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> c, std::size_t rows, std::size_t inner,
            std::size_t cols) {
  if (rows > 1 && rows * inner * cols >= kParallelFlops)
    matmul_parallel(a, b, c, rows, inner, cols);
  else
    matmul_serial(a, b, c, rows, inner, cols);
}

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
}

}  // namespace defectforge::kernels
