// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "defectforge/imaging/image.hpp"

namespace defectforge::imaging {

/// Copies the w x h region with top-left (x, y). Throws BoxOutOfBounds when
/// the region leaves the image.
GrayImage crop(const GrayImage& image, int x, int y, int w, int h);

/// Bilinear resampling with pixel-center alignment.
GrayImage resize_bilinear(const GrayImage& image, int width, int height);

/// Swaps rows and columns.
GrayImage transpose(const GrayImage& image);

}  // namespace defectforge::imaging
