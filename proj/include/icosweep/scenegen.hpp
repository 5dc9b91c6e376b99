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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icosweep/camera.hpp"
#include "icosweep/icosphere.hpp"
#include "icosweep/image.hpp"

namespace icosweep {

struct SphereProp {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Box standing upright, rotated by `yaw_deg` about the world z axis.
struct BoxProp {
  Vec3 center = Vec3::Zero();
  Vec3 half = Vec3::Zero();
  double yaw_deg = 0.0;
};

struct Light {
  Vec3 direction = Vec3(0.3, 0.2, -1.0);  // direction the light travels
  double ambient = 0.35;
  double diffuse = 0.65;
};

/// Axis-aligned room with textured walls and props. Every surface gets a
/// checker texture with per-cell jitter and a slow brightness gradient, all
/// derived from `seed` and the surface id; `uniform_albedo` replaces every
/// texture by one colour.
struct Scene {
  std::uint64_t seed = 0;
  Vec3 room_min = Vec3(-2, -2, -1.2);
  Vec3 room_max = Vec3(2, 2, 1.2);
  double checker = 0.25;
  Light light;
  std::vector<SphereProp> spheres;
  std::vector<BoxProp> boxes;
  std::optional<Vec3> uniform_albedo;
};

struct Hit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // facing the ray origin
  Vec3 albedo = Vec3::Zero();
};

/// First surface hit along origin + t * dir (dir need not be unit; t is in
/// units of |dir|). Nullopt only when the origin is outside the room.
std::optional<Hit> cast(const Scene& scene, const Vec3& origin, const Vec3& dir);

/// Ambient plus directional Lambertian shading.
Vec3 shade(const Scene& scene, const Hit& hit);
/// Shaded colour seen along a ray; black when nothing is hit.
Vec3 ray_color(const Scene& scene, const Vec3& origin, const Vec3& dir);

/// Renders a fisheye image of intr.width x intr.height, averaging
/// supersample^2 rays per pixel. Pixels whose centre is beyond the FoV are black.
Image render_fisheye(const Scene& scene, const Extrinsics& extr, const FisheyeIntrinsics& intr, int supersample = 1);
/// Distance along the unit ray of every pixel centre; 0 beyond the FoV.
Image render_depth(const Scene& scene, const Extrinsics& extr, const FisheyeIntrinsics& intr);

/// Distance from `center` to the first hit along each vertex direction.
std::vector<double> gt_depth_ico(const Scene& scene, const Vec3& center, const Icosphere& ico);
/// Shaded colour along each vertex direction seen from `origin` (3 per vertex).
std::vector<float> ray_cast_ico(const Scene& scene, const Vec3& origin, const Icosphere& ico);

/// Cameras at `baseline` from `center` facing +x, -y, -x, +y (front, right,
/// back, left with z up), equiangular intrinsics.
CameraRig default_rig(double fov_deg = 220.0, int image_size = 256, double baseline = 0.2,
                      const Vec3& center = Vec3::Zero());

/// Pitches every camera down by `pitch_deg` about its own horizontal x axis.
CameraRig rotate_rig(const CameraRig& rig, double pitch_deg);

/// Seeded room with 2-3 spheres and 1-3 boxes kept clear of the rig
/// (`center`, cameras within `clearance` of it).
Scene random_scene(std::uint64_t seed, const Vec3& center = Vec3::Zero(), double clearance = 0.65);

/// Throws ValidationError unless every point lies strictly inside the room
/// and outside all props.
void validate_scene(const Scene& scene, const std::vector<Vec3>& points);

/// Line-oriented `key = value` scene description (seed, room, checker,
/// light, sphere, box, uniform). Throws ParseError with the line number.
Scene parse_scene(std::string_view text);
Scene load_scene_file(const std::string& path);
std::string format_scene(const Scene& scene);

}  // namespace icosweep
