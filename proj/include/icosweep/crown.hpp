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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icosweep/icosphere.hpp"
#include "icosweep/tensor.hpp"

namespace icosweep {

/// Per-vertex features, data shaped [V, ...] (e.g. [V, C] or [V, N, C]).
template <class T>
struct VertexFeatures {
  int level = 0;
  Tensor<T> data;

  std::size_t num_vertices() const { return data.dim(0); }
};

/// Crown layout: col is [5, R, W, ...], row is [5, W, R, ...] with
/// R = 2^(level+1)+1 and W = 2^level+1; trailing dims match the vertex features.
template <class T>
struct CrownGrids {
  int level = 0;
  Tensor<T> col;
  Tensor<T> row;
};

/// Row stride (elements per vertex) of a [V, ...] tensor.
inline std::size_t row_stride(const Shape& s) { return s.empty() ? 0 : shape_size(s) / s[0]; }

/// Precomputed gather/scatter plan for one chart.
struct CrownIndex {
  int level = 0;
  int rect_rows = 0;
  int rect_cols = 0;
  std::vector<std::uint32_t> col_cells;  // 5*R*W vertex ids
  std::vector<std::uint32_t> row_cells;  // 5*W*R vertex ids
  std::vector<std::uint32_t> multiplicity;  // per vertex
  std::vector<std::uint32_t> first_cell;    // per vertex, index into col_cells ++ row_cells

  explicit CrownIndex(const UnfoldChart& chart);
  CrownIndex() = default;
  std::size_t num_vertices() const { return multiplicity.size(); }
};

/// dst[k] = src[index[k]] for rows of `stride` elements.
template <class T>
void gather_rows(const T* src, std::size_t stride, std::span<const std::uint32_t> index, T* dst);
/// dst[index[k]] += src[k]
template <class T>
void scatter_add_rows(const T* src, std::size_t stride, std::span<const std::uint32_t> index, T* dst);

template <class T>
CrownGrids<T> to_crown(const VertexFeatures<T>& f, const CrownIndex& index);
template <class T>
CrownGrids<T> to_crown(const VertexFeatures<T>& f, const UnfoldChart& chart) {
  return to_crown(f, CrownIndex(chart));
}

/// Mean over all cells that map to each vertex. Accumulated relative to the
/// vertex's first cell so that equal duplicates reproduce their value exactly.
template <class T>
VertexFeatures<T> from_crown(const CrownGrids<T>& g, const CrownIndex& index);
template <class T>
VertexFeatures<T> from_crown(const CrownGrids<T>& g, const UnfoldChart& chart) {
  return from_crown(g, CrownIndex(chart));
}

/// Replicate-border padding of a batch of grids laid out [B, H, W, D, F]:
/// H and W are always padded by `margin`, D only when `pad_depth`.
struct PadDims {
  std::size_t batch = 1, height = 1, width = 1, depth = 1, feat = 1;
  int margin = 1;
  bool pad_depth = false;

  std::size_t out_height() const { return height + 2 * margin; }
  std::size_t out_width() const { return width + 2 * margin; }
  std::size_t out_depth() const { return pad_depth ? depth + 2 * margin : depth; }
};

template <class T>
void pad_replicate_forward(const T* src, T* dst, const PadDims& d);
/// Adjoint: folds padded gradients back onto the border cells they copied.
template <class T>
void pad_replicate_backward(const T* dsrc_padded, T* dsrc, const PadDims& d);

/// Pads the two leading axes of a [H, W, ...] array.
template <class T>
Tensor<T> pad_replicate(const Tensor<T>& rect, int margin);

}  // namespace icosweep
