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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "icosweep/geometry.hpp"

namespace icosweep {

using Face = std::array<std::uint32_t, 3>;

inline constexpr int kDefaultMaxLevel = 10;

constexpr std::size_t vertex_count(int level) { return 2 + 10 * (std::size_t{1} << (2 * level)); }
constexpr std::size_t face_count(int level) { return 20 * (std::size_t{1} << (2 * level)); }

/// Subdivided icosahedron.
///
/// Vertex ids are stable across levels: the first vertex_count(k) vertices of a
/// level-l sphere are exactly the level-k vertices. Faces of every level k <= l
/// are kept, ordered so that the children of level-k face f are the level-(k+1)
/// faces 4f..4f+3.
struct Icosphere {
  int level = 0;
  std::vector<Vec3> vertices;
  std::vector<std::vector<Face>> level_faces;  // [k] -> faces at level k
  // [k] -> level-k edge (min,max) -> id of the midpoint vertex inserted at level k+1
  std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> midpoints;
  std::uint32_t north_pole_index = 0;
  std::uint32_t south_pole_index = 11;

  const std::vector<Face>& faces() const { return level_faces.back(); }
  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces().size(); }

  /// Level-(k+1) ids of the children of level-k face `f`.
  static std::array<std::uint32_t, 4> face_children(std::uint32_t f) {
    return {4 * f, 4 * f + 1, 4 * f + 2, 4 * f + 3};
  }
  /// Midpoint vertex of the level-k edge (a, b); throws if (a, b) is not an edge.
  std::uint32_t midpoint(int k, std::uint32_t a, std::uint32_t b) const;
};

Icosphere build_icosphere(int level, int max_level = kDefaultMaxLevel);

/// Result of point location: the face hit by the ray and planar barycentric
/// weights of the ray/face-plane intersection, ordered like the face's vertices.
struct Location {
  std::uint32_t face = 0;
  std::array<double, 3> weights{};
};

/// Hierarchical O(level) point location of a unit direction.
Location locate(const Icosphere& ico, const Vec3& dir);

/// O(F) scan over all faces at the sphere's level; lowest face index wins ties.
Location locate_brute_force(const Icosphere& ico, const Vec3& dir);

/// Raw (unnormalised) cone coordinates of `dir` in the basis of triangle (a,b,c).
std::array<double, 3> cone_coordinates(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& dir);

/// Per-vertex count of distinct face-adjacent neighbours.
std::vector<int> vertex_valence(const Icosphere& ico);

void write_obj(std::ostream& out, const Icosphere& ico);

// ---------------------------------------------------------------------------
// Unfolding chart (crown layout)

enum class Orientation : std::uint8_t { kCol = 0, kRow = 1 };

struct ChartCell {
  Orientation orientation;
  std::uint8_t rect;
  std::uint16_t row;
  std::uint16_t col;
};

/// Maps the cells of the 5 column-oriented and 5 row-oriented rectangles to
/// icosphere vertex ids.
///
/// Column rectangles are rect_rows x rect_cols, row rectangles are
/// rect_cols x rect_rows; both are stored row-major. Every rectangle is a strip
/// of four level-0 triangles sheared onto a square grid in which lattice
/// neighbours are (0,±1), (±1,0) and ±(1,-1).
struct UnfoldChart {
  int level = 0;
  int rect_rows = 0;  // 2^(level+1) + 1
  int rect_cols = 0;  // 2^level + 1
  std::array<std::vector<std::uint32_t>, 5> col_maps;
  std::array<std::vector<std::uint32_t>, 5> row_maps;
  std::vector<std::vector<ChartCell>> duplicates;

  std::size_t cells_per_rect() const { return std::size_t(rect_rows) * std::size_t(rect_cols); }
  std::size_t num_vertices() const { return duplicates.size(); }

  std::uint32_t col_vertex(int rect, int r, int c) const { return col_maps[rect][std::size_t(r) * rect_cols + c]; }
  std::uint32_t row_vertex(int rect, int r, int c) const { return row_maps[rect][std::size_t(r) * rect_rows + c]; }

  /// All 10 rectangles concatenated: col 0..4 then row 0..4, each row-major.
  std::vector<std::uint32_t> flat_cells() const;
};

UnfoldChart build_chart(const Icosphere& ico);
/// Chart of a coarser level k <= ico.level, sharing the vertex ids of `ico`.
UnfoldChart build_chart(const Icosphere& ico, int level);

/// CSV dump: orientation,rect,row,col,vertex_id
void write_chart_csv(std::ostream& out, const UnfoldChart& chart);

}  // namespace icosweep
