// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/imaging/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "defectforge/common/error.hpp"

namespace defectforge::imaging {

const char* to_string(PatchOrigin origin) {
  return origin == PatchOrigin::kReal ? "real" : "generated";
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0)
    fail(ErrorKind::kIo, "cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
    png_image_free(&image);
    fail(ErrorKind::kIo, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  GrayImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < buffer.size(); ++i) out.pixels[i] = buffer[i] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  std::vector<png_byte> buffer(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), buffer.begin(), to_byte);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  if (png_image_write_to_stdio(&image, file.get(), 0, buffer.data(), 0, nullptr) == 0)
    fail(ErrorKind::kIo, "cannot encode PNG " + path.string() + ": " + image.message);
}

}  // namespace defectforge::imaging
