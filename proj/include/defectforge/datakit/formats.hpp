// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "defectforge/datakit/dataset.hpp"

namespace defectforge::datakit {

// Canonical manifest:
// {"classes": [...], "images": [{"id", "file", "width", "height"}],
//  "annotations": [{"image_id", "class", "bbox": [x, y, w, h]}]}
// plus an optional "provenance" array for synthetic images.
std::string to_canonical_json(const Dataset& ds);
/// `origin` names the source in ParseError messages.
Dataset parse_canonical_json(const std::string& text, const std::string& origin = "<memory>");

Dataset load_canonical(const std::filesystem::path& path);
void save_canonical(const std::filesystem::path& path, const Dataset& ds);

std::string to_coco_json(const Dataset& ds);
Dataset parse_coco_json(const std::string& text, const std::string& origin = "<memory>");

/// Reads every *.xml file of a Pascal VOC annotation directory, in file name
/// order. VOC corners are 1-based and inclusive: x = xmin - 1 and
/// w = xmax - xmin + 1.
Dataset import_voc(const std::filesystem::path& dir);

/// Detects the format of a manifest file (canonical, COCO, or a VOC
/// directory) and loads it.
Dataset load_any(const std::filesystem::path& path);

/// Reads pixels for every image, resolving file paths against `base_dir`.
void load_pixels(Dataset& ds, const std::filesystem::path& base_dir);
/// Writes the PNGs of images that carry pixels and then the manifest.
void save_dataset(const std::filesystem::path& manifest_path, const Dataset& ds);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace defectforge::datakit
