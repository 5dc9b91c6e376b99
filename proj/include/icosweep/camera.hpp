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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icosweep/geometry.hpp"
#include "icosweep/icosphere.hpp"
#include "icosweep/image.hpp"

namespace icosweep {

/// World-to-camera rigid transform: p_c = R_cw * p_w + t_cw.
struct Extrinsics {
  Mat3 R_cw = Mat3::Identity();
  Vec3 t_cw = Vec3::Zero();

  Mat3 R_wc() const { return R_cw.transpose(); }
  /// Camera position in world coordinates.
  Vec3 t_wc() const { return -R_cw.transpose() * t_cw; }
  Vec3 to_camera(const Vec3& p_w) const { return R_cw * p_w + t_cw; }
  Vec3 to_world(const Vec3& p_c) const { return R_cw.transpose() * (p_c - t_cw); }

  /// From a camera-to-world orientation and the camera position.
  static Extrinsics from_pose(const Mat3& R_wc, const Vec3& position);
  /// Throws ValidationError unless R_cw is a rotation within `tol`.
  void validate(double tol = 1e-9) const;
};

/// OCamCalib-style model. Unprojection: sensor point (x, y) from the affine
/// [u - cx; v - cy] = [c d; e 1][x; y], ray (x, y, -F(rho)) with
/// F(rho) = a0 + a1 rho + ... (a0 < 0). Projection: rho = b0 + b1 theta + ...,
/// theta being the angle from the optical axis (+z).
struct PolynomialModel {
  std::vector<double> forward;  // a0..an
  std::vector<double> inverse;  // b0..bm
  double c = 1.0, d = 0.0, e = 0.0;
};

/// Equidistant fisheye: image radius = focal * theta.
struct EquiangularModel {
  double focal = 0.0;  // pixels per radian
};

struct FisheyeIntrinsics {
  std::variant<PolynomialModel, EquiangularModel> model;
  Vec2 center = Vec2::Zero();  // principal point, pixels
  int width = 0;
  int height = 0;
  double fov_deg = 180.0;

  bool is_polynomial() const { return std::holds_alternative<PolynomialModel>(model); }
  double half_fov() const { return deg2rad(fov_deg) / 2.0; }
};

/// Pixel of `p_cam`, or nullopt when beyond the FoV or outside the image.
std::optional<Vec2> project(const FisheyeIntrinsics& intr, const Vec3& p_cam);
/// Unit ray of a pixel, or nullopt when the ray is beyond the FoV.
std::optional<Vec3> unproject(const FisheyeIntrinsics& intr, const Vec2& px);

/// Largest project(unproject(u)) - u distance over `samples` random in-FoV pixels.
double round_trip_error(const FisheyeIntrinsics& intr, int samples = 1000, std::uint64_t seed = 1);

/// Parses the line-oriented calibration format and validates the round trip
/// (< 0.1 px). Throws ParseError (with line) or ValidationError.
FisheyeIntrinsics load_calibration(std::string_view text);
FisheyeIntrinsics load_calibration_file(const std::string& path);
std::string format_calibration(const FisheyeIntrinsics& intr);

/// Equiangular camera whose FoV circle touches the image border.
FisheyeIntrinsics make_equiangular(int width, int height, double fov_deg);

/// Fits forward/inverse polynomials to a radial mapping theta -> rho on [0, theta_max].
PolynomialModel fit_polynomial_model(const std::function<double(double)>& rho_of_theta, double theta_max,
                                     int forward_degree, int inverse_degree);

struct Camera {
  std::string name;
  Extrinsics extrinsics;
  FisheyeIntrinsics intrinsics;
  std::string calib_path;  // as written in the rig file
};

struct CameraRig {
  std::vector<Camera> cameras;

  /// Mean of the camera positions.
  Vec3 center() const;
};

/// Rig file: one `cam <name> <calib-path> R r00..r22 t tx ty tz` line per
/// camera; calibration paths are relative to the rig file's directory.
CameraRig load_rig(const std::string& path);
/// Writes the rig file plus one calibration file per camera next to it.
void save_rig(const std::string& path, const CameraRig& rig);

/// Image sampled at every icosphere vertex.
struct IcoImage {
  int level = 0;
  int channels = 0;
  std::vector<float> values;   // num_vertices x channels
  std::vector<std::uint8_t> valid;

  std::size_t num_vertices() const { return valid.size(); }
  float value(std::size_t v, int ch) const { return values[v * channels + ch]; }
};

/// Samples `image` along R_cw * v for every vertex v (translation unused).
/// Out-of-FoV vertices get valid = 0 and value 0.
IcoImage project_to_icosphere(const Image& image, const FisheyeIntrinsics& intr, const Extrinsics& extr,
                              const Icosphere& ico);

}  // namespace icosweep
