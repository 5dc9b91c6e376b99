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


#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "icosweep/error.hpp"
#include "icosweep/icosphere.hpp"

using namespace icosweep;

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 d;
  do d = Vec3(n(rng), n(rng), n(rng));
  while (d.norm() < 1e-6);
  return d.normalized();
}

double weight_of(const Icosphere& ico, const Location& loc, std::uint32_t v) {
  const Face& f = ico.faces()[loc.face];
  double w = 0;
  for (int k = 0; k < 3; ++k)
    if (f[k] == v) w += loc.weights[k];
  return w;
}

}  // namespace

TEST_CASE("vertex and face counts follow the closed forms") {
  CHECK(build_icosphere(0).num_vertices() == 12);
  CHECK(build_icosphere(0).num_faces() == 20);
  CHECK(build_icosphere(1).num_vertices() == 42);
  CHECK(build_icosphere(1).num_faces() == 80);
  CHECK(build_icosphere(7).num_vertices() == 163842);
  for (int l = 0; l <= 6; ++l) {
    const Icosphere ico = build_icosphere(l);
    CHECK(ico.num_vertices() == 2 + 10 * (std::size_t{1} << (2 * l)));
    CHECK(ico.num_faces() == 20 * (std::size_t{1} << (2 * l)));
  }
}

TEST_CASE("unit norms, poles and valence") {
  for (int l = 0; l <= 4; ++l) {
    const Icosphere ico = build_icosphere(l);
    for (const Vec3& v : ico.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    CHECK(ico.vertices[ico.north_pole_index] == Vec3(0, 0, 1));
    CHECK(ico.vertices[ico.south_pole_index] == Vec3(0, 0, -1));
    const std::vector<int> val = vertex_valence(ico);
    int fives = 0;
    for (std::size_t v = 0; v < val.size(); ++v) {
      if (val[v] == 5) {
        ++fives;
        CHECK(v < 12);
      } else {
        CHECK(val[v] == 6);
      }
    }
    CHECK(fives == 12);
  }
}

TEST_CASE("faces are counter-clockwise seen from outside") {
  const Icosphere ico = build_icosphere(3);
  for (const Face& f : ico.faces()) {
    const Vec3& a = ico.vertices[f[0]];
    const Vec3& b = ico.vertices[f[1]];
    const Vec3& c = ico.vertices[f[2]];
    CHECK((b - a).cross(c - a).dot(a + b + c) > 0);
  }
}

TEST_CASE("subdivision hierarchy: nested ids and children") {
  const Icosphere ico = build_icosphere(3);
  const Icosphere coarse = build_icosphere(2);
  for (std::size_t v = 0; v < coarse.num_vertices(); ++v) CHECK(ico.vertices[v] == coarse.vertices[v]);
  for (int k = 0; k < 3; ++k) {
    const auto& parents = ico.level_faces[k];
    const auto& kids = ico.level_faces[k + 1];
    for (std::uint32_t f = 0; f < parents.size(); ++f) {
      std::set<std::uint32_t> corner_ids;
      for (std::uint32_t c : Icosphere::face_children(f))
        for (std::uint32_t v : kids[c]) corner_ids.insert(v);
      // 3 corners and 3 edge midpoints
      CHECK(corner_ids.size() == 6);
      for (std::uint32_t v : parents[f]) CHECK(corner_ids.count(v) == 1);
      const Vec3 m = (ico.vertices[parents[f][0]] + ico.vertices[parents[f][1]]).normalized();
      const std::uint32_t mid = ico.midpoint(k, parents[f][0], parents[f][1]);
      CHECK((ico.vertices[mid] - m).norm() < 1e-12);
      CHECK(corner_ids.count(mid) == 1);
    }
  }
  CHECK_THROWS(ico.midpoint(0, 0, 11));
}

TEST_CASE("level guard") {
  CHECK_THROWS_AS(build_icosphere(11), ContractViolation);
  CHECK_THROWS_AS(build_icosphere(-1), ContractViolation);
  CHECK_THROWS_AS(build_icosphere(3, 2), ContractViolation);
}

TEST_CASE("chart shapes and cell totals") {
  const Icosphere ico2 = build_icosphere(2);
  const UnfoldChart c2 = build_chart(ico2);
  CHECK(c2.rect_rows == 9);
  CHECK(c2.rect_cols == 5);
  const std::vector<std::uint32_t> cells = c2.flat_cells();
  CHECK(cells.size() == 450);
  const std::set<std::uint32_t> unique(cells.begin(), cells.end());
  CHECK(unique.size() == 162);

  const UnfoldChart c5 = build_chart(build_icosphere(5));
  CHECK(c5.rect_rows == 65);
  CHECK(c5.rect_cols == 33);
  for (int i = 0; i < 5; ++i) {
    CHECK(c5.col_maps[i].size() == 65u * 33u);
    CHECK(c5.row_maps[i].size() == 33u * 65u);
  }
}

TEST_CASE("chart covers every vertex in both orientations; interiors are distinct") {
  for (int l = 0; l <= 5; ++l) {
    const Icosphere ico = build_icosphere(l);
    const UnfoldChart ch = build_chart(ico);
    const int R = ch.rect_rows, W = ch.rect_cols;
    std::vector<int> in_col(ico.num_vertices(), 0), in_row(ico.num_vertices(), 0);
    for (int i = 0; i < 5; ++i)
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < W; ++c) {
          in_col[ch.col_vertex(i, r, c)]++;
          in_row[ch.row_vertex(i, c, r)]++;
        }
    for (std::size_t v = 0; v < ico.num_vertices(); ++v) {
      CHECK(in_col[v] >= 1);
      CHECK(in_row[v] >= 1);
      CHECK(ch.duplicates[v].size() >= 2);
      CHECK(ch.duplicates[v].size() == std::size_t(in_col[v] + in_row[v]));
    }
    for (int i = 0; i < 5; ++i) {
      std::set<std::uint32_t> col_interior, row_interior;
      std::size_t n = 0;
      for (int r = 1; r < R - 1; ++r)
        for (int c = 1; c < W - 1; ++c, ++n) {
          col_interior.insert(ch.col_vertex(i, r, c));
          row_interior.insert(ch.row_vertex(i, c, r));
        }
      CHECK(col_interior.size() == n);
      CHECK(row_interior.size() == n);
    }
    // duplicates point back at cells holding the vertex
    for (std::size_t v = 0; v < ico.num_vertices(); ++v)
      for (const ChartCell& cell : ch.duplicates[v]) {
        const std::uint32_t id = cell.orientation == Orientation::kCol ? ch.col_vertex(cell.rect, cell.row, cell.col)
                                                                       : ch.row_vertex(cell.rect, cell.row, cell.col);
        CHECK(id == v);
      }
  }
}

TEST_CASE("chart lattice neighbours are sphere neighbours") {
  const Icosphere ico = build_icosphere(3);
  const UnfoldChart ch = build_chart(ico);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const Face& f : ico.faces())
    for (int k = 0; k < 3; ++k) {
      edges.insert({f[k], f[(k + 1) % 3]});
      edges.insert({f[(k + 1) % 3], f[k]});
    }
  const int R = ch.rect_rows, W = ch.rect_cols;
  const int steps[3][2] = {{0, 1}, {1, 0}, {1, -1}};
  for (int i = 0; i < 5; ++i)
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < W; ++c)
        for (const auto& s : steps) {
          const int r2 = r + s[0], c2 = c + s[1];
          if (r2 < 0 || r2 >= R || c2 < 0 || c2 >= W) continue;
          const std::uint32_t a = ch.col_vertex(i, r, c), b = ch.col_vertex(i, r2, c2);
          if (a != b) CHECK(edges.count({a, b}) == 1);
        }
}

TEST_CASE("even cells of level l coincide with level l-1") {
  for (int l = 1; l <= 5; ++l) {
    const Icosphere ico = build_icosphere(l);
    const UnfoldChart fine = build_chart(ico);
    const UnfoldChart coarse = build_chart(build_icosphere(l - 1));
    const UnfoldChart coarse_shared = build_chart(ico, l - 1);
    for (int i = 0; i < 5; ++i)
      for (int r = 0; r < coarse.rect_rows; ++r)
        for (int c = 0; c < coarse.rect_cols; ++c) {
          CHECK(ico.vertices[fine.col_vertex(i, 2 * r, 2 * c)] == ico.vertices[coarse.col_vertex(i, r, c)]);
          CHECK(ico.vertices[fine.row_vertex(i, 2 * c, 2 * r)] == ico.vertices[coarse.row_vertex(i, c, r)]);
          CHECK(coarse_shared.col_vertex(i, r, c) == coarse.col_vertex(i, r, c));
        }
  }
}

TEST_CASE("locate: vertex directions and face centroids") {
  const Icosphere ico = build_icosphere(3);
  for (std::uint32_t v = 0; v < ico.num_vertices(); v += 7) {
    const Location loc = locate(ico, ico.vertices[v]);
    CHECK(std::abs(weight_of(ico, loc, v) - 1.0) < 1e-12);
  }
  for (std::uint32_t f = 0; f < ico.num_faces(); f += 13) {
    const Face& face = ico.faces()[f];
    const Vec3 c = (ico.vertices[face[0]] + ico.vertices[face[1]] + ico.vertices[face[2]]).normalized();
    const Location loc = locate(ico, c);
    CHECK(loc.face == f);
    for (double w : loc.weights) CHECK(std::abs(w - 1.0 / 3.0) < 1e-9);
  }
}

TEST_CASE("locate agrees with a brute-force face scan") {
  const Icosphere ico = build_icosphere(4);
  std::mt19937_64 rng(7);
  for (int n = 0; n < 2000; ++n) {
    const Vec3 d = random_direction(rng);
    const Location a = locate(ico, d);
    const Location b = locate_brute_force(ico, d);
    CHECK(a.face == b.face);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(a.weights[k] - b.weights[k]) < 1e-12);
      CHECK(a.weights[k] >= 0.0);
      CHECK(a.weights[k] <= 1.0);
    }
    CHECK(std::abs(a.weights[0] + a.weights[1] + a.weights[2] - 1.0) < 1e-12);
  }
}

TEST_CASE("locate reproduces linear fields on the face plane") {
  const Icosphere ico = build_icosphere(3);
  std::mt19937_64 rng(11);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 d = random_direction(rng);
    const Vec3 a = random_direction(rng) * 3.0;
    const Location loc = locate(ico, d);
    const Face& f = ico.faces()[loc.face];
    const Vec3& p0 = ico.vertices[f[0]];
    const Vec3 normal = (ico.vertices[f[1]] - p0).cross(ico.vertices[f[2]] - p0);
    const Vec3 q = d * (normal.dot(p0) / normal.dot(d));
    double recon = 0;
    for (int k = 0; k < 3; ++k) recon += loc.weights[k] * a.dot(ico.vertices[f[k]]);
    CHECK(std::abs(recon - a.dot(q)) < 1e-9);
  }
}

TEST_CASE("locate ties go to the lowest face index") {
  const Icosphere ico = build_icosphere(2);
  // a shared edge midpoint is on two faces
  const Face& f = ico.faces()[0];
  const Vec3 m = (ico.vertices[f[0]] + ico.vertices[f[1]]).normalized();
  const Location b = locate_brute_force(ico, m);
  CHECK(b.face == 0);
  const Location a = locate(ico, m);
  const Face& hit = ico.faces()[a.face];
  double recon = 0;
  for (int k = 0; k < 3; ++k) recon += a.weights[k] * ico.vertices[hit[k]].x();
  double expect = 0;
  for (int k = 0; k < 3; ++k) expect += b.weights[k] * ico.vertices[f[k]].x();
  CHECK(std::abs(recon - expect) < 1e-12);
}

TEST_CASE("OBJ and chart CSV exports") {
  const Icosphere ico = build_icosphere(1);
  std::ostringstream obj;
  write_obj(obj, ico);
  std::istringstream in(obj.str());
  std::string line;
  int v = 0, f = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  CHECK(v == 42);
  CHECK(f == 80);

  std::ostringstream csv;
  write_chart_csv(csv, build_chart(ico));
  std::istringstream cin(csv.str());
  int rows = 0;
  std::getline(cin, line);
  CHECK(line == "orientation,rect,row,col,vertex_id");
  while (std::getline(cin, line)) ++rows;
  CHECK(rows == 10 * 5 * 3);
}
