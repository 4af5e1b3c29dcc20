// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace defectforge::kernels {

// Row-major dense products, C[rows x cols] = A[rows x inner] * B[inner x cols].
// Both variants accumulate every output element over `inner` in the same
// order, so their results are bit-identical; the serial one is the reference.
void matmul_serial(std::span<const double> a, std::span<const double> b,
                   std::span<double> c, std::size_t rows, std::size_t inner,
                   std::size_t cols);

void matmul_parallel(std::span<const double> a, std::span<const double> b,
                     std::span<double> c, std::size_t rows, std::size_t inner,
                     std::size_t cols);

/// Dispatches to the parallel kernel once the product is large enough to
/// amortize thread start-up.
void matmul(std::span<const double> a, std::span<const double> b,
            std::span<double> c, std::size_t rows, std::size_t inner,
            std::size_t cols);

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t rows, std::size_t cols);

}  // namespace defectforge::kernels
