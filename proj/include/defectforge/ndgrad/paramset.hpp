// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defectforge/ndgrad/tape.hpp"
#include "defectforge/ndgrad/tensor.hpp"

namespace defectforge::ndgrad {

// Named tensors in insertion order. Names are unique; iteration order is the
// order in which entries were added and is stable across runs.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  void add(std::string name, Tensor value);
  void set(std::string_view name, Tensor value);

  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  /// Records every entry as a leaf on `tape`, in order.
  std::vector<Tensor> bind(Tape& tape) const;
  /// Entries as untaped tensors, in order.
  std::vector<Tensor> constants() const;
  /// Pairs `values` (gradients, for instance) with this set's names.
  ParamSet with_values(const std::vector<Tensor>& values) const;

  std::size_t parameter_count() const;

 private:
  std::vector<Entry> entries_;
};

/// Bitwise equality of names, shapes and values.
bool identical(const ParamSet& a, const ParamSet& b);

/// Writes the flat binary container: magic "NDG1", then one record per
/// tensor (u32 name length, name bytes, u32 rank, u64 extents, f64 payload),
/// all little-endian.
void write_paramset(std::ostream& out, const ParamSet& params);
ParamSet read_paramset(std::istream& in);

// Model file: a 4-byte magic, a u32 length, a descriptor string (JSON by
// convention), then the NDG1 container.
struct ModelFile {
  std::string descriptor;
  ParamSet params;
};

void write_model_file(const std::filesystem::path& path, std::string_view magic,
                      const std::string& descriptor, const ParamSet& params);
/// Throws Io when unreadable and ParseError on a wrong magic or truncation.
ModelFile read_model_file(const std::filesystem::path& path, std::string_view magic);

}  // namespace defectforge::ndgrad
