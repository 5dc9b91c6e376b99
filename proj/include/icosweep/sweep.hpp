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
#include <optional>
#include <string>
#include <vector>

#include "icosweep/autograd.hpp"
#include "icosweep/camera.hpp"
#include "icosweep/crown.hpp"
#include "icosweep/icosphere.hpp"

namespace icosweep {

/// Virtual spheres with inverse radii affine in the index:
/// 1/d_j = (j-1)/(N-1) / d_min + eps, j = 1..N (stored 0-based).
struct SphereSet {
  int count = 0;
  double d_min = 0.0;
  double eps = 0.0;
  std::vector<double> radii;
};

inline constexpr double kDefaultEps = 1e-6;

SphereSet sphere_radii(int count, double d_min, double eps = kDefaultEps);

struct SweepEntry {
  std::uint32_t face = 0;
  std::array<float, 3> weights{};
  std::uint8_t valid = 0;  // 0 when the sphere point coincides with the camera centre

  bool operator==(const SweepEntry&) const = default;
};

/// Interpolation table per (camera k, vertex i, sphere j), stored k-major.
/// Depends on camera positions only; FoV validity is applied when a plan is
/// made from the per-camera masks.
struct SweepCache {
  int level = 0;
  int num_spheres = 0;
  int num_cameras = 0;
  double d_min = 0.0;
  double eps = 0.0;
  std::uint64_t rig_hash = 0;
  std::vector<SweepEntry> entries;

  std::size_t num_vertices() const { return vertex_count(level); }
  std::size_t offset(int k, std::size_t i, int j) const {
    return (std::size_t(k) * num_vertices() + i) * std::size_t(num_spheres) + std::size_t(j);
  }
  const SweepEntry& at(int k, std::size_t i, int j) const { return entries[offset(k, i, j)]; }
};

/// Camera positions are snapped to a 1 nm grid before sweeping, so rigs whose
/// positions differ only by rounding share one cache.
inline constexpr double kPositionGrid = 1e9;
Vec3 sweep_position(const Camera& cam);
/// Mean of the snapped camera positions.
Vec3 sweep_center(const CameraRig& rig);

/// Content hash of everything the cache depends on.
std::uint64_t sweep_key(const CameraRig& rig, int level, const SphereSet& spheres);

/// Uncached evaluation of one table entry: the point centre + radius * dir
/// seen from `camera_position`, located on `ico`.
SweepEntry sweep_entry(const Vec3& center, const Vec3& camera_position, const Vec3& dir, double radius,
                       const Icosphere& ico);

SweepCache build_sweep_cache(const CameraRig& rig, const Icosphere& ico, const SphereSet& spheres);

/// SWPC file: magic, u32 level, u32 N, u32 cameras, f64 d_min, f64 eps,
/// u64 rig hash, then per entry u32 face, 3 x f32 weights, u8 validity.
void write_sweep_cache(std::ostream& out, const SweepCache& cache);
SweepCache read_sweep_cache(std::istream& in);
void write_sweep_cache(const std::string& path, const SweepCache& cache);
SweepCache read_sweep_cache(const std::string& path);

/// Reuses `<dir>/<hash>.swpc` when its header matches, otherwise builds and
/// (if dir is non-empty) persists it. `rebuilt` reports which happened.
SweepCache load_or_build_sweep_cache(const CameraRig& rig, const Icosphere& ico, const SphereSet& spheres,
                                     const std::string& dir, bool* rebuilt = nullptr);
/// The ICOSWEEP_CACHE_DIR environment variable, or empty.
std::string cache_dir_from_env();

/// Cache resolved against an icosphere and per-camera FoV masks: vertex ids
/// and weights per entry; an entry is usable iff the cache entry is valid and
/// all three face vertices are valid for that camera.
struct SweepPlan {
  int level = 0;
  int num_spheres = 0;
  int num_cameras = 0;
  std::size_t num_vertices = 0;
  std::vector<std::array<std::uint32_t, 3>> vertices;
  std::vector<std::array<float, 3>> weights;
  std::vector<std::uint8_t> usable;
  bool validity_channel = false;  // append one 0/1 usability channel per camera

  std::size_t channels(std::size_t feat_channels) const {
    return std::size_t(num_cameras) * feat_channels + (validity_channel ? std::size_t(num_cameras) : 0);
  }

  std::size_t offset(int k, std::size_t i, int j) const {
    return (std::size_t(k) * num_vertices + i) * std::size_t(num_spheres) + std::size_t(j);
  }
  /// Number of cameras with a usable sample at (i, j).
  int coverage(std::size_t i, int j) const;
};

/// `masks[k]` holds at least vertex_count(cache.level) validity flags (a
/// finer-level mask works since vertex ids are nested). Empty masks mean all valid.
SweepPlan make_sweep_plan(const SweepCache& cache, const Icosphere& ico,
                          const std::vector<std::vector<std::uint8_t>>& masks);

/// Cost volume [V, N, K*C] (plus K validity channels when enabled): camera
/// k's block at (i, j) is the barycentric blend of its features at the cached
/// face, zero where unusable.
template <class T>
Tensor<T> build_cost_volume(const std::vector<const Tensor<T>*>& features, const SweepPlan& plan);

namespace reference {
/// Direct per-entry evaluation, serial; test oracle for build_cost_volume.
template <class T>
Tensor<T> build_cost_volume(const std::vector<const Tensor<T>*>& features, const SweepPlan& plan);
}  // namespace reference

namespace nn {
/// Differentiable cost volume over per-camera features [V, C].
template <class T>
Var cost_volume(Graph<T>& g, const std::vector<Var>& features, const SweepPlan& plan);
}  // namespace nn

}  // namespace icosweep
