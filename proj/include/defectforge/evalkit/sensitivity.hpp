// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace defectforge::evalkit {

struct GridSpec {
  std::vector<std::size_t> m_r;
  std::vector<std::size_t> m_g;
  std::size_t folds = 3;
  std::uint64_t seed = 0;
};

struct CellResult {
  std::size_t m_r = 0;
  std::size_t m_g = 0;
  /// Minority-class AP averaged over folds; unset when the cell failed.
  std::optional<double> ap;
  std::string error;
};

struct ExperimentGrid {
  std::vector<std::size_t> m_r;
  std::vector<std::size_t> m_g;
  /// Row-major over (m_r, m_g).
  std::vector<CellResult> cells;

  const CellResult& at(std::size_t r, std::size_t g) const { return cells[r * m_g.size() + g]; }
};

/// Trains, augments and evaluates one fold of one cell, returning the
/// minority-class AP. Must be safe to call concurrently.
using CellPipeline = std::function<double(std::size_t m_r, std::size_t m_g, std::size_t fold,
                                          std::uint64_t seed)>;

/// Seed handed to the pipeline for one fold of one cell.
std::uint64_t cell_seed(std::uint64_t root, std::size_t cell, std::size_t fold);

/// Runs every cell, `jobs` at a time (1 = serial, 0 = OpenMP default).
/// A throwing cell is recorded as failed and the run goes on.
ExperimentGrid run_sensitivity(const GridSpec& spec, const CellPipeline& pipeline,
                               int jobs = 0);

/// Header "m_r\m_g,<m_g...>", one row per m_r; failed cells print "NA".
void write_grid_csv(std::ostream& out, const ExperimentGrid& grid);
/// Static heat map of the grid.
void write_grid_svg(std::ostream& out, const ExperimentGrid& grid);

}  // namespace defectforge::evalkit
