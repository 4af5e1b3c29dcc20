// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/ndgrad/paramset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "defectforge/common/error.hpp"

namespace defectforge::ndgrad {

void ParamSet::add(std::string name, Tensor value) {
  if (contains(name))
    fail(ErrorKind::kNameMismatch, "duplicate parameter name '" + name + "'");
  entries_.push_back({std::move(name), value.detach()});
}

void ParamSet::set(std::string_view name, Tensor value) {
  for (auto& e : entries_)
    if (e.name == name) {
      if (e.value.shape() != value.shape())
        fail(ErrorKind::kShapeMismatch,
             "parameter '" + e.name + "' has shape " +
                 shape_string(e.value.shape()));
      e.value = value.detach();
      return;
    }
  fail(ErrorKind::kNameMismatch, "no parameter named '" + std::string(name) + "'");
}

const Tensor& ParamSet::get(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.value;
  fail(ErrorKind::kNameMismatch, "no parameter named '" + std::string(name) + "'");
}

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor::zeros(e.value.shape()));
  return out;
}

std::vector<Tensor> ParamSet::bind(Tape& tape) const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(tape.leaf(e.value));
  return out;
}

std::vector<Tensor> ParamSet::constants() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.value);
  return out;
}

ParamSet ParamSet::with_values(const std::vector<Tensor>& values) const {
  if (values.size() != entries_.size())
    fail(ErrorKind::kNameMismatch, "value count does not match parameter count");
  ParamSet out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != entries_[i].value.shape())
      fail(ErrorKind::kShapeMismatch,
           "value for '" + entries_[i].name + "' has shape " +
               shape_string(values[i].shape()));
    out.add(entries_[i].name, values[i]);
  }
  return out;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool identical(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !identical(a[i].value, b[i].value))
      return false;
  return true;
}

namespace {

constexpr std::array<char, 4> kMagic{'N', 'D', 'G', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "container writer assumes a little-endian host");
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool get(std::istream& in, T& value) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) return false;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return true;
}

[[noreturn]] void truncated(const std::string& what) {
  fail(ErrorKind::kParseError, "NDG1 container truncated while reading " + what);
}

}  // namespace

void write_paramset(std::ostream& out, const ParamSet& params) {
  out.write(kMagic.data(), kMagic.size());
  for (const auto& e : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t extent : e.value.shape())
      put<std::uint64_t>(out, static_cast<std::uint64_t>(extent));
    for (double v : e.value.values()) put<double>(out, v);
  }
  if (!out) fail(ErrorKind::kIo, "failed writing NDG1 container");
}

ParamSet read_paramset(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    fail(ErrorKind::kParseError, "missing NDG1 magic");
  ParamSet params;
  while (in.peek() != std::char_traits<char>::eof()) {
    std::uint32_t name_len = 0;
    if (!get(in, name_len)) truncated("name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) truncated("name");
    std::uint32_t rank = 0;
    if (!get(in, rank)) truncated("rank of '" + name + "'");
    Shape shape(rank);
    for (auto& extent : shape) {
      std::uint64_t e = 0;
      if (!get(in, e)) truncated("extents of '" + name + "'");
      extent = static_cast<std::size_t>(e);
    }
    std::vector<double> values(numel(shape));
    for (double& v : values)
      if (!get(in, v)) truncated("payload of '" + name + "'");
    params.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return params;
}

void write_model_file(const std::filesystem::path& path, std::string_view magic,
                      const std::string& descriptor, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(descriptor.size()));
  out.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
  write_paramset(out, params);
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

ModelFile read_model_file(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model " + path.string());
  std::string head(magic.size(), '\0');
  if (!in.read(head.data(), static_cast<std::streamsize>(head.size())) || head != magic)
    fail(ErrorKind::kParseError, path.string() + ": not a " + std::string(magic) + " model file");
  ModelFile model;
  std::uint32_t len = 0;
  if (!get(in, len)) fail(ErrorKind::kParseError, path.string() + ": truncated header");
  model.descriptor.resize(len);
  if (!in.read(model.descriptor.data(), len))
    fail(ErrorKind::kParseError, path.string() + ": truncated descriptor");
  model.params = read_paramset(in);
  return model;
}

}  // namespace defectforge::ndgrad
