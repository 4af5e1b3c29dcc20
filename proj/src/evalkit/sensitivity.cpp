// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/evalkit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <omp.h>

#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"

namespace defectforge::evalkit {

std::uint64_t cell_seed(std::uint64_t root, std::size_t cell, std::size_t fold) {
  return derive_seed(derive_seed(root, "evalkit.sensitivity.cell", cell),
                     "evalkit.sensitivity.fold", fold);
}

ExperimentGrid run_sensitivity(const GridSpec& spec, const CellPipeline& pipeline, int jobs) {
  if (spec.m_r.empty() || spec.m_g.empty())
    fail(ErrorKind::kConfigInvalid, "sensitivity grid needs at least one m_r and one m_g");
  if (spec.folds < 1) fail(ErrorKind::kConfigInvalid, "sensitivity needs at least one fold");
  ExperimentGrid grid;
  grid.m_r = spec.m_r;
  grid.m_g = spec.m_g;
  grid.cells.resize(spec.m_r.size() * spec.m_g.size());

  const auto n = static_cast<std::int64_t>(grid.cells.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto cell = static_cast<std::size_t>(i);
    CellResult& out = grid.cells[cell];
    out.m_r = spec.m_r[cell / spec.m_g.size()];
    out.m_g = spec.m_g[cell % spec.m_g.size()];
    try {
      double sum = 0.0;
      for (std::size_t f = 0; f < spec.folds; ++f)
        sum += pipeline(out.m_r, out.m_g, f, cell_seed(spec.seed, cell, f));
      out.ap = sum / static_cast<double>(spec.folds);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }
  return grid;
}

void write_grid_csv(std::ostream& out, const ExperimentGrid& grid) {
  out << "m_r\\m_g";
  for (std::size_t g : grid.m_g) out << ',' << g;
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < grid.m_r.size(); ++r) {
    out << grid.m_r[r];
    for (std::size_t g = 0; g < grid.m_g.size(); ++g) {
      const auto& cell = grid.at(r, g);
      out << ',';
      if (cell.ap) out << *cell.ap;
      else out << "NA";
    }
    out << '\n';
  }
}

void write_grid_svg(std::ostream& out, const ExperimentGrid& grid) {
  const int cell = 60, left = 70, top = 40;
  const int width = left + cell * static_cast<int>(grid.m_g.size()) + 20;
  const int height = top + cell * static_cast<int>(grid.m_r.size()) + 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << left << "\" y=\"15\">AP by m_r (rows) and m_g (columns)</text>\n";
  out << std::fixed << std::setprecision(3);
  for (std::size_t g = 0; g < grid.m_g.size(); ++g)
    out << "<text x=\"" << left + cell * static_cast<int>(g) + 5 << "\" y=\"" << top - 5
        << "\">" << grid.m_g[g] << "</text>\n";
  for (std::size_t r = 0; r < grid.m_r.size(); ++r) {
    const int y = top + cell * static_cast<int>(r);
    out << "<text x=\"5\" y=\"" << y + cell / 2 << "\">" << grid.m_r[r] << "</text>\n";
    for (std::size_t g = 0; g < grid.m_g.size(); ++g) {
      const auto& c = grid.at(r, g);
      const int x = left + cell * static_cast<int>(g);
      const double v = c.ap ? std::clamp(*c.ap, 0.0, 1.0) : 0.0;
      const int shade = c.ap ? static_cast<int>(std::lround(255 * (1.0 - v))) : 200;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#888\"/>\n";
      out << "<text x=\"" << x + 8 << "\" y=\"" << y + cell / 2 << "\">";
      if (c.ap) out << *c.ap;
      else out << "fail";
      out << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace defectforge::evalkit
