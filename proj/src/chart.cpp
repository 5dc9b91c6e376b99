// Copyright 2026 The icosweep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <ostream>

#include "icosweep/error.hpp"
#include "icosweep/icosphere.hpp"

namespace icosweep {
namespace {

struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint32_t> ids;
  std::uint32_t at(int r, int c) const { return ids[std::size_t(r) * cols + c]; }
};

// Each rectangle is a strip of four level-0 triangles. With the lattice steps
// p = down-right and q = down-left from the north pole, column strips span
// 2p x 1q and row strips 1p x 2q.
Grid level0_col(int i) {
  const std::uint32_t up0 = 1 + i, up1 = 1 + (i + 1) % 5;
  const std::uint32_t lo0 = 6 + i, lo1 = 6 + (i + 1) % 5;
  return {3, 2, {0, up0, up1, lo0, lo1, 11}};
}

Grid level0_row(int i) {
  const std::uint32_t up0 = 1 + i, up1 = 1 + (i + 1) % 5;
  const std::uint32_t lo0 = 6 + i, lo_prev = 6 + (i + 4) % 5;
  return {2, 3, {0, up0, lo_prev, up1, lo0, 11}};
}

// 2D midpoint induction mirroring the 3D edge-midpoint subdivision.
Grid refine(const Grid& g, const Icosphere& ico, int k) {
  Grid out;
  out.rows = 2 * (g.rows - 1) + 1;
  out.cols = 2 * (g.cols - 1) + 1;
  out.ids.assign(std::size_t(out.rows) * out.cols, 0);
  auto set = [&](int r, int c, std::uint32_t v) { out.ids[std::size_t(r) * out.cols + c] = v; };
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      set(2 * r, 2 * c, g.at(r, c));
      if (r + 1 < g.rows) set(2 * r + 1, 2 * c, ico.midpoint(k, g.at(r, c), g.at(r + 1, c)));
      if (c + 1 < g.cols) set(2 * r, 2 * c + 1, ico.midpoint(k, g.at(r, c), g.at(r, c + 1)));
      if (r + 1 < g.rows && c + 1 < g.cols) {
        set(2 * r + 1, 2 * c + 1, ico.midpoint(k, g.at(r, c + 1), g.at(r + 1, c)));
      }
    }
  }
  return out;
}

}  // namespace

UnfoldChart build_chart(const Icosphere& ico) { return build_chart(ico, ico.level); }

UnfoldChart build_chart(const Icosphere& ico, int level) {
  require(level >= 0 && level <= ico.level, "build_chart: level out of range");
  UnfoldChart chart;
  chart.level = level;
  chart.rect_rows = (1 << (level + 1)) + 1;
  chart.rect_cols = (1 << level) + 1;
  for (int i = 0; i < 5; ++i) {
    Grid col = level0_col(i);
    Grid row = level0_row(i);
    for (int k = 0; k < level; ++k) {
      col = refine(col, ico, k);
      row = refine(row, ico, k);
    }
    chart.col_maps[i] = std::move(col.ids);
    chart.row_maps[i] = std::move(row.ids);
  }

  chart.duplicates.assign(vertex_count(level), {});
  for (int i = 0; i < 5; ++i) {
    for (int r = 0; r < chart.rect_rows; ++r) {
      for (int c = 0; c < chart.rect_cols; ++c) {
        chart.duplicates[chart.col_vertex(i, r, c)].push_back(
            {Orientation::kCol, std::uint8_t(i), std::uint16_t(r), std::uint16_t(c)});
      }
    }
  }
  for (int i = 0; i < 5; ++i) {
    for (int r = 0; r < chart.rect_cols; ++r) {
      for (int c = 0; c < chart.rect_rows; ++c) {
        chart.duplicates[chart.row_vertex(i, r, c)].push_back(
            {Orientation::kRow, std::uint8_t(i), std::uint16_t(r), std::uint16_t(c)});
      }
    }
  }
  for (const auto& d : chart.duplicates) {
    if (d.size() < 2) throw ContractViolation("build_chart: vertex not covered by both orientations");
  }
  return chart;
}

std::vector<std::uint32_t> UnfoldChart::flat_cells() const {
  std::vector<std::uint32_t> out;
  out.reserve(10 * cells_per_rect());
  for (const auto& m : col_maps) out.insert(out.end(), m.begin(), m.end());
  for (const auto& m : row_maps) out.insert(out.end(), m.begin(), m.end());
  return out;
}

void write_chart_csv(std::ostream& out, const UnfoldChart& chart) {
  out << "orientation,rect,row,col,vertex_id\n";
  for (int i = 0; i < 5; ++i) {
    for (int r = 0; r < chart.rect_rows; ++r) {
      for (int c = 0; c < chart.rect_cols; ++c) out << "col," << i << ',' << r << ',' << c << ',' << chart.col_vertex(i, r, c) << "\n";
    }
  }
  for (int i = 0; i < 5; ++i) {
    for (int r = 0; r < chart.rect_cols; ++r) {
      for (int c = 0; c < chart.rect_rows; ++c) out << "row," << i << ',' << r << ',' << c << ',' << chart.row_vertex(i, r, c) << "\n";
    }
  }
}

}  // namespace icosweep
