// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defectforge/imaging/image.hpp"

namespace defectforge::imaging {

inline constexpr int kFeatherWidth = 3;

/// Otsu's threshold over a 256-bin histogram of [0, 1] intensities. Returns
/// the threshold t such that foreground/background split as v > t / v <= t.
double otsu_threshold(const GrayImage& image);

/// Binary foreground mask (values 0/1) from Otsu thresholding. The side of
/// the threshold holding the minority of border pixels is foreground, so
/// both dark and bright defects on a uniform ground are picked up. A flat
/// image yields an all-ones mask.
GrayImage otsu_mask(const GrayImage& image);

/// Linear-ramp feathering of a binary mask: a foreground pixel at chessboard
/// distance d from the nearest background pixel (pixels outside the image
/// count as background) gets min(1, d / width). Background stays 0.
GrayImage feather(const GrayImage& binary, int width = kFeatherWidth);

}  // namespace defectforge::imaging
