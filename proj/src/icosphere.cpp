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

#include "icosweep/icosphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include "icosweep/error.hpp"

namespace icosweep {
namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

// Poles on +-z, upper ring at latitude atan(1/2) starting at longitude 0,
// lower ring offset by 36 degrees. Ids: 0 north, 1..5 upper, 6..10 lower, 11 south.
std::vector<Vec3> level0_vertices() {
  std::vector<Vec3> v;
  v.reserve(12);
  v.emplace_back(0.0, 0.0, 1.0);
  const double lat = std::atan(0.5);
  for (int i = 0; i < 5; ++i) {
    const double lon = deg2rad(72.0 * i);
    v.emplace_back(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  }
  for (int i = 0; i < 5; ++i) {
    const double lon = deg2rad(72.0 * i + 36.0);
    v.emplace_back(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), -std::sin(lat));
  }
  v.emplace_back(0.0, 0.0, -1.0);
  return v;
}

std::vector<Face> level0_faces(const std::vector<Vec3>& v) {
  auto up = [](int i) { return std::uint32_t(1 + (i % 5)); };
  auto lo = [](int i) { return std::uint32_t(6 + (i % 5)); };
  std::vector<Face> f;
  for (int i = 0; i < 5; ++i) f.push_back({0, up(i), up(i + 1)});
  for (int i = 0; i < 5; ++i) f.push_back({up(i), lo(i), up(i + 1)});
  for (int i = 0; i < 5; ++i) f.push_back({lo(i), lo(i + 1), up(i + 1)});
  for (int i = 0; i < 5; ++i) f.push_back({lo(i), 11, lo(i + 1)});
  // Counter-clockwise seen from outside.
  for (auto& face : f) {
    const Vec3& a = v[face[0]];
    const Vec3& b = v[face[1]];
    const Vec3& c = v[face[2]];
    if ((b - a).cross(c - a).dot(a + b + c) < 0) std::swap(face[1], face[2]);
  }
  return f;
}

bool inside(const std::array<double, 3>& w) {
  constexpr double tol = -1e-14;
  return w[0] >= tol && w[1] >= tol && w[2] >= tol;
}

Location finish(std::uint32_t face, std::array<double, 3> w) {
  for (auto& x : w) x = std::max(0.0, x);
  const double s = w[0] + w[1] + w[2];
  Location loc;
  loc.face = face;
  for (int m = 0; m < 3; ++m) loc.weights[m] = std::min(1.0, w[m] / s);
  return loc;
}

double min_coord(const std::array<double, 3>& w) { return std::min({w[0], w[1], w[2]}); }

}  // namespace

std::uint32_t Icosphere::midpoint(int k, std::uint32_t a, std::uint32_t b) const {
  require(k >= 0 && k < int(midpoints.size()), "midpoint: level out of range");
  const auto it = midpoints[k].find(edge_key(a, b));
  if (it == midpoints[k].end()) throw ContractViolation("midpoint: not an edge at level " + std::to_string(k));
  return it->second;
}

Icosphere build_icosphere(int level, int max_level) {
  if (level < 0) throw ContractViolation("build_icosphere: level must be >= 0");
  if (level > max_level) {
    throw ContractViolation("build_icosphere: level " + std::to_string(level) + " exceeds memory guard " +
                            std::to_string(max_level));
  }
  Icosphere ico;
  ico.level = level;
  ico.vertices = level0_vertices();
  ico.vertices.reserve(vertex_count(level));
  ico.level_faces.push_back(level0_faces(ico.vertices));

  for (int k = 0; k < level; ++k) {
    const auto& parent = ico.level_faces[k];
    auto& mids = ico.midpoints.emplace_back();
    mids.reserve(parent.size() * 3 / 2);
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      const auto [it, fresh] = mids.try_emplace(edge_key(a, b), std::uint32_t(ico.vertices.size()));
      if (fresh) ico.vertices.push_back((ico.vertices[a] + ico.vertices[b]).normalized());
      return it->second;
    };
    std::vector<Face> children;
    children.reserve(parent.size() * 4);
    for (const Face& f : parent) {
      const std::uint32_t ab = mid(f[0], f[1]);
      const std::uint32_t bc = mid(f[1], f[2]);
      const std::uint32_t ca = mid(f[2], f[0]);
      children.push_back({f[0], ab, ca});
      children.push_back({ab, f[1], bc});
      children.push_back({ca, bc, f[2]});
      children.push_back({ab, bc, ca});
    }
    ico.level_faces.push_back(std::move(children));
  }
  return ico;
}

std::array<double, 3> cone_coordinates(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& dir) {
  return {dir.dot(b.cross(c)), dir.dot(c.cross(a)), dir.dot(a.cross(b))};
}

Location locate(const Icosphere& ico, const Vec3& dir) {
  const auto& v = ico.vertices;
  auto coords = [&](const Face& f) { return cone_coordinates(v[f[0]], v[f[1]], v[f[2]], dir); };

  // Level 0: lowest index containing the ray, else the least-outside face.
  std::uint32_t face = 0;
  std::array<double, 3> w{};
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t f = 0; f < ico.level_faces[0].size(); ++f) {
    const auto c = coords(ico.level_faces[0][f]);
    if (inside(c)) {
      face = f;
      w = c;
      best = 0.0;
      break;
    }
    if (min_coord(c) > best) {
      best = min_coord(c);
      face = f;
      w = c;
    }
  }
  for (int k = 1; k <= ico.level; ++k) {
    const auto& faces = ico.level_faces[k];
    std::uint32_t pick = 4 * face;
    std::array<double, 3> pick_w = coords(faces[pick]);
    double pick_min = min_coord(pick_w);
    if (!inside(pick_w)) {
      for (std::uint32_t child = 4 * face + 1; child < 4 * face + 4; ++child) {
        const auto c = coords(faces[child]);
        if (inside(c)) {
          pick = child;
          pick_w = c;
          break;
        }
        if (min_coord(c) > pick_min) {
          pick_min = min_coord(c);
          pick = child;
          pick_w = c;
        }
      }
    }
    face = pick;
    w = pick_w;
  }
  return finish(face, w);
}

Location locate_brute_force(const Icosphere& ico, const Vec3& dir) {
  const auto& v = ico.vertices;
  const auto& faces = ico.faces();
  std::uint32_t face = 0;
  std::array<double, 3> w{};
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t f = 0; f < faces.size(); ++f) {
    const auto c = cone_coordinates(v[faces[f][0]], v[faces[f][1]], v[faces[f][2]], dir);
    if (inside(c)) return finish(f, c);
    if (min_coord(c) > best) {
      best = min_coord(c);
      face = f;
      w = c;
    }
  }
  return finish(face, w);
}

std::vector<int> vertex_valence(const Icosphere& ico) {
  std::vector<std::set<std::uint32_t>> nb(ico.num_vertices());
  for (const Face& f : ico.faces()) {
    for (int m = 0; m < 3; ++m) {
      nb[f[m]].insert(f[(m + 1) % 3]);
      nb[f[m]].insert(f[(m + 2) % 3]);
    }
  }
  std::vector<int> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i] = int(nb[i].size());
  return out;
}

void write_obj(std::ostream& out, const Icosphere& ico) {
  out << "# icosphere level " << ico.level << "\n";
  for (const Vec3& p : ico.vertices) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << "\n";
  for (const Face& f : ico.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << "\n";
}

}  // namespace icosweep
