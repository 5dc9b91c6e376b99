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

#include "icosweep/crown.hpp"

#include <algorithm>
#include <cstring>

namespace icosweep {

CrownIndex::CrownIndex(const UnfoldChart& chart)
    : level(chart.level), rect_rows(chart.rect_rows), rect_cols(chart.rect_cols) {
  for (const auto& m : chart.col_maps) col_cells.insert(col_cells.end(), m.begin(), m.end());
  for (const auto& m : chart.row_maps) row_cells.insert(row_cells.end(), m.begin(), m.end());
  multiplicity.resize(chart.num_vertices());
  for (std::size_t v = 0; v < multiplicity.size(); ++v) multiplicity[v] = std::uint32_t(chart.duplicates[v].size());
  first_cell.assign(multiplicity.size(), UINT32_MAX);
  const std::size_t total = col_cells.size() + row_cells.size();
  for (std::size_t k = 0; k < total; ++k) {
    const std::uint32_t v = k < col_cells.size() ? col_cells[k] : row_cells[k - col_cells.size()];
    if (first_cell[v] == UINT32_MAX) first_cell[v] = std::uint32_t(k);
  }
}

template <class T>
void gather_rows(const T* src, std::size_t stride, std::span<const std::uint32_t> index, T* dst) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(index.size()); ++k) {
    std::memcpy(dst + std::size_t(k) * stride, src + std::size_t(index[k]) * stride, stride * sizeof(T));
  }
}

template <class T>
void scatter_add_rows(const T* src, std::size_t stride, std::span<const std::uint32_t> index, T* dst) {
  for (std::size_t k = 0; k < index.size(); ++k) {
    const T* s = src + k * stride;
    T* d = dst + std::size_t(index[k]) * stride;
    for (std::size_t j = 0; j < stride; ++j) d[j] += s[j];
  }
}

template <class T>
CrownGrids<T> to_crown(const VertexFeatures<T>& f, const CrownIndex& index) {
  require(f.level == index.level, "to_crown: level mismatch");
  require(f.num_vertices() == index.num_vertices(), "to_crown: vertex count mismatch");
  const Shape& s = f.data.shape();
  const std::size_t stride = row_stride(s);
  Shape col_shape{5, std::size_t(index.rect_rows), std::size_t(index.rect_cols)};
  Shape row_shape{5, std::size_t(index.rect_cols), std::size_t(index.rect_rows)};
  col_shape.insert(col_shape.end(), s.begin() + 1, s.end());
  row_shape.insert(row_shape.end(), s.begin() + 1, s.end());
  CrownGrids<T> g{f.level, Tensor<T>(col_shape), Tensor<T>(row_shape)};
  gather_rows(f.data.data(), stride, index.col_cells, g.col.data());
  gather_rows(f.data.data(), stride, index.row_cells, g.row.data());
  return g;
}

template <class T>
VertexFeatures<T> from_crown(const CrownGrids<T>& g, const CrownIndex& index) {
  require(g.level == index.level, "from_crown: level mismatch");
  require(g.col.rank() >= 3 && g.col.dim(1) == std::size_t(index.rect_rows) &&
              g.col.dim(2) == std::size_t(index.rect_cols),
          "from_crown: col shape does not match chart");
  require(g.row.rank() == g.col.rank() && g.row.dim(1) == std::size_t(index.rect_cols) &&
              g.row.dim(2) == std::size_t(index.rect_rows),
          "from_crown: row shape does not match chart");
  Shape s{index.num_vertices()};
  s.insert(s.end(), g.col.shape().begin() + 3, g.col.shape().end());
  VertexFeatures<T> f{g.level, Tensor<T>(s)};
  const std::size_t stride = row_stride(s);
  const std::size_t ncol = index.col_cells.size();
  auto cell = [&](std::size_t k) {
    return k < ncol ? g.col.data() + k * stride : g.row.data() + (k - ncol) * stride;
  };
  auto accumulate = [&](const T* src, std::span<const std::uint32_t> cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const T* ref = cell(index.first_cell[cells[k]]);
      const T* x = src + k * stride;
      T* d = f.data.data() + std::size_t(cells[k]) * stride;
      for (std::size_t j = 0; j < stride; ++j) d[j] += x[j] - ref[j];
    }
  };
  accumulate(g.col.data(), index.col_cells);
  accumulate(g.row.data(), index.row_cells);
  for (std::size_t v = 0; v < index.num_vertices(); ++v) {
    const T count = T(index.multiplicity[v]);
    const T* ref = cell(index.first_cell[v]);
    T* row = f.data.data() + v * stride;
    for (std::size_t j = 0; j < stride; ++j) row[j] = ref[j] + row[j] / count;
  }
  return f;
}

template <class T>
void pad_replicate_forward(const T* src, T* dst, const PadDims& d) {
  const std::size_t oh = d.out_height(), ow = d.out_width(), od = d.out_depth();
  const std::ptrdiff_t m = d.margin;
  const std::ptrdiff_t dm = d.pad_depth ? m : 0;
  auto clampi = [](std::ptrdiff_t x, std::size_t n) { return std::size_t(std::clamp<std::ptrdiff_t>(x, 0, std::ptrdiff_t(n) - 1)); };
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(d.batch); ++b) {
    for (std::ptrdiff_t y = 0; y < std::ptrdiff_t(oh); ++y) {
      const std::size_t sy = clampi(y - m, d.height);
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t sx = clampi(std::ptrdiff_t(x) - m, d.width);
        for (std::size_t z = 0; z < od; ++z) {
          const std::size_t sz = clampi(std::ptrdiff_t(z) - dm, d.depth);
          const T* s = src + (((b * d.height + sy) * d.width + sx) * d.depth + sz) * d.feat;
          T* o = dst + (((b * oh + y) * ow + x) * od + z) * d.feat;
          std::memcpy(o, s, d.feat * sizeof(T));
        }
      }
    }
  }
}

template <class T>
void pad_replicate_backward(const T* dsrc_padded, T* dsrc, const PadDims& d) {
  const std::size_t oh = d.out_height(), ow = d.out_width(), od = d.out_depth();
  const std::ptrdiff_t m = d.margin;
  const std::ptrdiff_t dm = d.pad_depth ? m : 0;
  auto clampi = [](std::ptrdiff_t x, std::size_t n) { return std::size_t(std::clamp<std::ptrdiff_t>(x, 0, std::ptrdiff_t(n) - 1)); };
  // Batches are independent, so the per-batch accumulation is race free.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(d.batch); ++b) {
    for (std::size_t y = 0; y < oh; ++y) {
      const std::size_t sy = clampi(std::ptrdiff_t(y) - m, d.height);
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t sx = clampi(std::ptrdiff_t(x) - m, d.width);
        for (std::size_t z = 0; z < od; ++z) {
          const std::size_t sz = clampi(std::ptrdiff_t(z) - dm, d.depth);
          T* s = dsrc + (((b * d.height + sy) * d.width + sx) * d.depth + sz) * d.feat;
          const T* o = dsrc_padded + (((b * oh + y) * ow + x) * od + z) * d.feat;
          for (std::size_t j = 0; j < d.feat; ++j) s[j] += o[j];
        }
      }
    }
  }
}

template <class T>
Tensor<T> pad_replicate(const Tensor<T>& rect, int margin) {
  require(margin >= 1, "pad_replicate: margin must be >= 1");
  require(rect.rank() >= 2, "pad_replicate: need at least 2 dims");
  PadDims d;
  d.height = rect.dim(0);
  d.width = rect.dim(1);
  d.feat = rect.size() / (d.height * d.width);
  d.margin = margin;
  Shape s = rect.shape();
  s[0] = d.out_height();
  s[1] = d.out_width();
  Tensor<T> out(s);
  pad_replicate_forward(rect.data(), out.data(), d);
  return out;
}

#define ICOSWEEP_INSTANTIATE(T)                                                                       \
  template void gather_rows<T>(const T*, std::size_t, std::span<const std::uint32_t>, T*);           \
  template void scatter_add_rows<T>(const T*, std::size_t, std::span<const std::uint32_t>, T*);      \
  template CrownGrids<T> to_crown<T>(const VertexFeatures<T>&, const CrownIndex&);                   \
  template VertexFeatures<T> from_crown<T>(const CrownGrids<T>&, const CrownIndex&);                 \
  template void pad_replicate_forward<T>(const T*, T*, const PadDims&);                              \
  template void pad_replicate_backward<T>(const T*, T*, const PadDims&);                             \
  template Tensor<T> pad_replicate<T>(const Tensor<T>&, int);

ICOSWEEP_INSTANTIATE(float)
ICOSWEEP_INSTANTIATE(double)
#undef ICOSWEEP_INSTANTIATE

}  // namespace icosweep
