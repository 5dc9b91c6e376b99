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

#include "icosweep/camera.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "icosweep/error.hpp"

namespace icosweep {
namespace {

double horner(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
  return y;
}

bool in_image(const FisheyeIntrinsics& intr, const Vec2& px) {
  return px.x() >= 0 && px.y() >= 0 && px.x() <= intr.width - 1 && px.y() <= intr.height - 1;
}

}  // namespace

Extrinsics Extrinsics::from_pose(const Mat3& R_wc, const Vec3& position) {
  Extrinsics e;
  e.R_cw = R_wc.transpose();
  e.t_cw = -e.R_cw * position;
  return e;
}

void Extrinsics::validate(double tol) const {
  const double ortho = (R_cw.transpose() * R_cw - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol || std::abs(R_cw.determinant() - 1.0) > tol) {
    throw ValidationError("extrinsics: R_cw is not a rotation");
  }
}

std::optional<Vec2> project(const FisheyeIntrinsics& intr, const Vec3& p_cam) {
  const double n = p_cam.norm();
  require(n > 0.0, "project: zero point");
  const double r_xy = std::hypot(p_cam.x(), p_cam.y());
  const double theta = std::atan2(r_xy, p_cam.z());
  if (theta > intr.half_fov()) return std::nullopt;
  const double cos_phi = r_xy > 0 ? p_cam.x() / r_xy : 1.0;
  const double sin_phi = r_xy > 0 ? p_cam.y() / r_xy : 0.0;
  Vec2 px;
  if (const auto* eq = std::get_if<EquiangularModel>(&intr.model)) {
    const double rho = eq->focal * theta;
    px = intr.center + Vec2(rho * cos_phi, rho * sin_phi);
  } else {
    const auto& poly = std::get<PolynomialModel>(intr.model);
    const double rho = horner(poly.inverse, theta);
    const double x = rho * cos_phi;
    const double y = rho * sin_phi;
    px = intr.center + Vec2(poly.c * x + poly.d * y, poly.e * x + y);
  }
  if (!in_image(intr, px)) return std::nullopt;
  return px;
}

std::optional<Vec3> unproject(const FisheyeIntrinsics& intr, const Vec2& px) {
  const Vec2 rel = px - intr.center;
  Vec3 ray;
  if (const auto* eq = std::get_if<EquiangularModel>(&intr.model)) {
    const double rho = rel.norm();
    const double theta = rho / eq->focal;
    if (theta > intr.half_fov()) return std::nullopt;
    const double cos_phi = rho > 0 ? rel.x() / rho : 1.0;
    const double sin_phi = rho > 0 ? rel.y() / rho : 0.0;
    ray = Vec3(std::sin(theta) * cos_phi, std::sin(theta) * sin_phi, std::cos(theta));
  } else {
    const auto& poly = std::get<PolynomialModel>(intr.model);
    Eigen::Matrix2d a;
    a << poly.c, poly.d, poly.e, 1.0;
    const Vec2 xy = a.inverse() * rel;
    const double rho = xy.norm();
    ray = Vec3(xy.x(), xy.y(), -horner(poly.forward, rho)).normalized();
    if (std::atan2(std::hypot(ray.x(), ray.y()), ray.z()) > intr.half_fov()) return std::nullopt;
  }
  return ray;
}

double round_trip_error(const FisheyeIntrinsics& intr, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> du(0.0, intr.width - 1.0), dv(0.0, intr.height - 1.0);
  double worst = 0.0;
  int found = 0;
  for (int attempt = 0; found < samples && attempt < samples * 100; ++attempt) {
    const Vec2 px(du(rng), dv(rng));
    const auto ray = unproject(intr, px);
    if (!ray) continue;
    ++found;
    const auto back = project(intr, *ray);
    if (!back) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, (*back - px).norm());
  }
  return worst;
}

FisheyeIntrinsics make_equiangular(int width, int height, double fov_deg) {
  FisheyeIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fov_deg = fov_deg;
  intr.center = Vec2((width - 1) / 2.0, (height - 1) / 2.0);
  const double radius = std::min(width, height) / 2.0 - 1.0;
  intr.model = EquiangularModel{radius / intr.half_fov()};
  return intr;
}

namespace {

std::vector<double> least_squares_poly(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  // fit in x / scale for conditioning, then undo the scaling per coefficient
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  Eigen::MatrixXd a(x.size(), degree + 1);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      a(i, k) = p;
      p *= x[i] / scale;
    }
    b(i) = y[i];
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  std::vector<double> c(sol.data(), sol.data() + sol.size());
  double s = 1.0;
  for (double& v : c) {
    v /= s;
    s *= scale;
  }
  return c;
}

}  // namespace

PolynomialModel fit_polynomial_model(const std::function<double(double)>& rho_of_theta, double theta_max,
                                     int forward_degree, int inverse_degree) {
  constexpr int kSamples = 400;
  std::vector<double> theta, rho, neg_f;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = theta_max * 1.02 * i / kSamples;
    theta.push_back(t);
    rho.push_back(rho_of_theta(t));
  }
  // Ray (x, y, -F) at radius rho has angle theta, so F(rho) = -rho / tan(theta);
  // the theta -> 0 limit is -rho'(0).
  std::vector<double> fr, fv;
  for (int i = 0; i <= kSamples; ++i) {
    if (theta[i] == 0.0) {
      const double h = 1e-6;
      fr.push_back(0.0);
      fv.push_back(-(rho_of_theta(h) - rho_of_theta(0.0)) / h);
    } else {
      fr.push_back(rho[i]);
      fv.push_back(-rho[i] / std::tan(theta[i]));
    }
  }
  PolynomialModel m;
  m.forward = least_squares_poly(fr, fv, forward_degree);
  m.inverse = least_squares_poly(theta, rho, inverse_degree);
  return m;
}

// ---------------------------------------------------------------------------
// Calibration text

namespace {

std::vector<double> parse_numbers(std::istringstream& in, int line, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    double x;
    if (!(in >> x)) throw ParseError("expected " + std::to_string(count) + " numbers", line);
    out.push_back(x);
  }
  std::string extra;
  if (in >> extra) throw ParseError("unexpected token '" + extra + "'", line);
  return out;
}

std::vector<double> parse_poly(std::istringstream& in, int line) {
  int degree = -1;
  if (!(in >> degree) || degree < 0 || degree > 32) throw ParseError("bad polynomial degree", line);
  return parse_numbers(in, line, std::size_t(degree) + 1);
}

}  // namespace

FisheyeIntrinsics load_calibration(std::string_view text) {
  std::istringstream all{std::string(text)};
  std::string raw;
  int line = 0;
  std::string model;
  std::optional<std::vector<double>> poly, invpoly, affine, center, size, fov, focal;
  while (std::getline(all, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream in(raw);
    std::string key;
    if (!(in >> key)) continue;
    if (key == "model") {
      if (!(in >> model) || (model != "polynomial" && model != "equiangular")) {
        throw ParseError("model must be polynomial or equiangular", line);
      }
    } else if (key == "poly") {
      poly = parse_poly(in, line);
    } else if (key == "invpoly") {
      invpoly = parse_poly(in, line);
    } else if (key == "affine") {
      affine = parse_numbers(in, line, 3);
    } else if (key == "center") {
      center = parse_numbers(in, line, 2);
    } else if (key == "size") {
      size = parse_numbers(in, line, 2);
    } else if (key == "fov") {
      fov = parse_numbers(in, line, 1);
    } else if (key == "focal") {
      focal = parse_numbers(in, line, 1);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  if (model.empty()) throw ValidationError("calibration: missing model");
  if (!center || !size || !fov) throw ValidationError("calibration: center, size and fov are required");

  FisheyeIntrinsics intr;
  intr.center = Vec2((*center)[0], (*center)[1]);
  intr.width = int((*size)[0]);
  intr.height = int((*size)[1]);
  intr.fov_deg = (*fov)[0];
  if (intr.width <= 1 || intr.height <= 1) throw ValidationError("calibration: bad image size");
  if (!(intr.fov_deg > 0.0 && intr.fov_deg < 360.0)) throw ValidationError("calibration: fov must be in (0, 360)");

  if (model == "equiangular") {
    if (!focal || (*focal)[0] <= 0.0) throw ValidationError("calibration: equiangular model needs focal > 0");
    intr.model = EquiangularModel{(*focal)[0]};
  } else {
    if (!poly) throw ValidationError("calibration: polynomial model needs poly");
    if (!invpoly) throw ValidationError("calibration: polynomial model needs invpoly");
    PolynomialModel m;
    m.forward = *poly;
    m.inverse = *invpoly;
    if (affine) {
      m.c = (*affine)[0];
      m.d = (*affine)[1];
      m.e = (*affine)[2];
    }
    if (std::abs(m.c - m.d * m.e) < 1e-12) throw ValidationError("calibration: singular affine");
    intr.model = m;
  }
  if (!project(intr, Vec3(0, 0, 1))) throw ValidationError("calibration: principal point outside the image");
  const double err = round_trip_error(intr);
  if (!(err < 0.1)) {
    throw ValidationError("calibration: project/unproject round trip error " + std::to_string(err) + " px");
  }
  return intr;
}

FisheyeIntrinsics load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_calibration(ss.str());
}

std::string format_calibration(const FisheyeIntrinsics& intr) {
  std::ostringstream out;
  out << std::setprecision(17);
  auto poly = [&](const char* key, const std::vector<double>& c) {
    out << key << ' ' << c.size() - 1;
    for (double x : c) out << ' ' << x;
    out << "\n";
  };
  if (const auto* eq = std::get_if<EquiangularModel>(&intr.model)) {
    out << "model equiangular\n";
    out << "focal " << eq->focal << "\n";
  } else {
    const auto& m = std::get<PolynomialModel>(intr.model);
    out << "model polynomial\n";
    poly("poly", m.forward);
    poly("invpoly", m.inverse);
    out << "affine " << m.c << ' ' << m.d << ' ' << m.e << "\n";
  }
  out << "center " << intr.center.x() << ' ' << intr.center.y() << "\n";
  out << "size " << intr.width << ' ' << intr.height << "\n";
  out << "fov " << intr.fov_deg << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Rig

Vec3 CameraRig::center() const {
  require(!cameras.empty(), "rig: no cameras");
  Vec3 sum = Vec3::Zero();
  for (const auto& cam : cameras) sum += cam.extrinsics.t_wc();
  return sum / double(cameras.size());
}

CameraRig load_rig(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open rig " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  CameraRig rig;
  std::string raw;
  int line = 0;
  while (std::getline(file, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream in(raw);
    std::string key;
    if (!(in >> key)) continue;
    if (key != "cam") throw ParseError("expected 'cam'", line);
    Camera cam;
    std::string tag;
    if (!(in >> cam.name >> cam.calib_path >> tag) || tag != "R") throw ParseError("expected name, calib path, R", line);
    Mat3 r;
    for (int i = 0; i < 9; ++i) {
      if (!(in >> r(i / 3, i % 3))) throw ParseError("expected 9 rotation entries", line);
    }
    Vec3 t;
    if (!(in >> tag) || tag != "t" || !(in >> t.x() >> t.y() >> t.z())) throw ParseError("expected t tx ty tz", line);
    if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 || r.determinant() < 0) {
      throw ValidationError("rig line " + std::to_string(line) + ": R is not a rotation");
    }
    // Snap to the nearest rotation; text round-off is well below 1e-6.
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    cam.extrinsics.R_cw = svd.matrixU() * svd.matrixV().transpose();
    cam.extrinsics.t_cw = t;
    const auto calib = std::filesystem::path(cam.calib_path);
    cam.intrinsics = load_calibration_file((calib.is_absolute() ? calib : dir / calib).string());
    rig.cameras.push_back(std::move(cam));
  }
  if (rig.cameras.empty()) throw ValidationError("rig has no cameras: " + path);
  return rig;
}

void save_rig(const std::string& path, const CameraRig& rig) {
  const auto dir = std::filesystem::path(path).parent_path();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write rig " + path);
  out << std::setprecision(17);
  for (const auto& cam : rig.cameras) {
    const std::string calib = cam.calib_path.empty() ? cam.name + ".calib" : cam.calib_path;
    std::ofstream(dir / calib) << format_calibration(cam.intrinsics);
    out << "cam " << cam.name << ' ' << calib << " R";
    for (int i = 0; i < 9; ++i) out << ' ' << cam.extrinsics.R_cw(i / 3, i % 3);
    const Vec3& t = cam.extrinsics.t_cw;
    out << " t " << t.x() << ' ' << t.y() << ' ' << t.z() << "\n";
  }
}

// ---------------------------------------------------------------------------

IcoImage project_to_icosphere(const Image& image, const FisheyeIntrinsics& intr, const Extrinsics& extr,
                              const Icosphere& ico) {
  require(image.width == intr.width && image.height == intr.height, "project_to_icosphere: image size mismatch");
  IcoImage out;
  out.level = ico.level;
  out.channels = image.channels;
  const std::size_t n = ico.num_vertices();
  out.values.assign(n * image.channels, 0.0f);
  out.valid.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
    const auto px = project(intr, extr.R_cw * ico.vertices[i]);
    if (!px) continue;
    if (bilinear_sample(image, px->x(), px->y(), &out.values[std::size_t(i) * image.channels])) out.valid[i] = 1;
  }
  return out;
}

}  // namespace icosweep
