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


#include "icosweep/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "icosweep/error.hpp"

namespace icosweep {
namespace {

constexpr double kHitEps = 1e-9;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double unit(std::uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

Vec3 palette(std::uint64_t h) {
  Vec3 c;
  for (int a = 0; a < 3; ++a) {
    h = splitmix(h);
    c[a] = 0.3 + 0.65 * unit(h);
  }
  return c;
}

// Checker with per-cell jitter and a slow cosine gradient over surface coordinates.
Vec3 albedo(const Scene& s, std::uint64_t surface, double u, double v) {
  if (s.uniform_albedo) return *s.uniform_albedo;
  const std::uint64_t h0 = splitmix(s.seed * 0x100000001b3ull + surface);
  const Vec3 a = palette(h0);
  const Vec3 b = 0.35 * palette(h0 ^ 0x5bd1e995ull);
  const double cu = std::floor(u / s.checker), cv = std::floor(v / s.checker);
  const long long iu = static_cast<long long>(cu), iv = static_cast<long long>(cv);
  const bool odd = ((iu + iv) & 1LL) != 0;
  const std::uint64_t hc = splitmix(h0 ^ (std::uint64_t(iu) * 0x9e3779b1ull) ^ (std::uint64_t(iv) * 0x85ebca77ull << 1));
  const double jitter = 0.7 + 0.3 * unit(hc);
  const double phase = 2.0 * kPi * unit(splitmix(h0 + 7));
  const double grad = 0.85 + 0.15 * std::cos(2.0 * kPi * (0.6 * u + 0.8 * v) / 2.5 + phase);
  Vec3 c = (odd ? a : b) * (jitter * grad);
  return c.cwiseMax(0.0).cwiseMin(1.0);
}

Mat3 yaw_matrix(double deg) { return axis_angle(Vec3::UnitZ(), deg2rad(deg)); }

bool inside_room(const Scene& s, const Vec3& p) {
  return (p.array() > s.room_min.array()).all() && (p.array() < s.room_max.array()).all();
}

void update(std::optional<Hit>& best, double t, const Vec3& point, const Vec3& normal, const Vec3& alb) {
  if (!best || t < best->t) best = Hit{t, point, normal, alb};
}

}  // namespace

std::optional<Hit> cast(const Scene& s, const Vec3& o, const Vec3& d) {
  if (!inside_room(s, o)) return std::nullopt;
  std::optional<Hit> best;
  {
    double t = std::numeric_limits<double>::infinity();
    int axis = -1;
    for (int a = 0; a < 3; ++a) {
      if (d[a] == 0.0) continue;
      const double ta = d[a] > 0 ? (s.room_max[a] - o[a]) / d[a] : (s.room_min[a] - o[a]) / d[a];
      if (ta < t) {
        t = ta;
        axis = a;
      }
    }
    if (axis < 0) return std::nullopt;
    Vec3 p = o + t * d;
    p[axis] = d[axis] > 0 ? s.room_max[axis] : s.room_min[axis];
    Vec3 n = Vec3::Zero();
    n[axis] = d[axis] > 0 ? -1.0 : 1.0;
    const int b = (axis + 1) % 3, c = (axis + 2) % 3;
    const std::uint64_t face = std::uint64_t(2 * axis + (d[axis] > 0 ? 1 : 0));
    best = Hit{t, p, n, albedo(s, face, p[b], p[c])};
  }
  for (std::size_t i = 0; i < s.spheres.size(); ++i) {
    const SphereProp& sp = s.spheres[i];
    const Vec3 oc = o - sp.center;
    const double A = d.squaredNorm(), B = 2.0 * d.dot(oc), C = oc.squaredNorm() - sp.radius * sp.radius;
    const double disc = B * B - 4 * A * C;
    if (disc < 0) continue;
    const double sq = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = B >= 0 ? -0.5 * (B + sq) : -0.5 * (B - sq);
    double t0 = q / A, t1 = q != 0 ? C / q : t0;
    if (t0 > t1) std::swap(t0, t1);
    const double t = t0 > kHitEps ? t0 : t1;
    if (!(t > kHitEps)) continue;
    if (best && t >= best->t) continue;
    const Vec3 p = o + t * d;
    Vec3 n = (p - sp.center) / sp.radius;
    if (n.dot(d) > 0) n = -n;
    const Vec3 r = (p - sp.center) / sp.radius;
    const double u = sp.radius * std::atan2(r.y(), r.x());
    const double v = sp.radius * std::asin(std::clamp(r.z(), -1.0, 1.0));
    update(best, t, p, n, albedo(s, 6 + i, u, v));
  }
  for (std::size_t i = 0; i < s.boxes.size(); ++i) {
    const BoxProp& bx = s.boxes[i];
    const Mat3 R = yaw_matrix(bx.yaw_deg);
    const Vec3 lo = R.transpose() * (o - bx.center);
    const Vec3 ld = R.transpose() * d;
    double tn = -std::numeric_limits<double>::infinity(), tf = std::numeric_limits<double>::infinity();
    int an = -1;
    bool miss = false;
    for (int a = 0; a < 3; ++a) {
      if (ld[a] == 0.0) {
        if (std::abs(lo[a]) > bx.half[a]) miss = true;
        continue;
      }
      double t1 = (-bx.half[a] - lo[a]) / ld[a], t2 = (bx.half[a] - lo[a]) / ld[a];
      if (t1 > t2) std::swap(t1, t2);
      if (t1 > tn) {
        tn = t1;
        an = a;
      }
      tf = std::min(tf, t2);
    }
    if (miss || an < 0 || tn > tf || !(tn > kHitEps)) continue;
    if (best && tn >= best->t) continue;
    const Vec3 lp = lo + tn * ld;
    Vec3 ln = Vec3::Zero();
    ln[an] = ld[an] > 0 ? -1.0 : 1.0;
    const int b = (an + 1) % 3, c = (an + 2) % 3;
    const std::uint64_t face = 100 + 6 * i + std::uint64_t(2 * an + (ld[an] > 0 ? 0 : 1));
    update(best, tn, o + tn * d, R * ln, albedo(s, face, lp[b], lp[c]));
  }
  return best;
}

Vec3 shade(const Scene& s, const Hit& h) {
  const Vec3 l = -s.light.direction.normalized();
  const double lambert = std::max(0.0, h.normal.dot(l));
  return h.albedo * (s.light.ambient + s.light.diffuse * lambert);
}

Vec3 ray_color(const Scene& s, const Vec3& origin, const Vec3& dir) {
  const auto h = cast(s, origin, dir);
  return h ? shade(s, *h) : Vec3::Zero();
}

Image render_fisheye(const Scene& s, const Extrinsics& extr, const FisheyeIntrinsics& intr, int supersample) {
  require(supersample >= 1, "render_fisheye: supersample must be >= 1");
  require(intr.width > 0 && intr.height > 0, "render_fisheye: empty image");
  Image img(intr.width, intr.height, 3);
  const Mat3 R_wc = extr.R_wc();
  const Vec3 o = extr.t_wc();
  const int ss = supersample;
#pragma omp parallel for schedule(dynamic, 4)
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      if (!unproject(intr, Vec2(u, v))) continue;
      Vec3 acc = Vec3::Zero();
      int n = 0;
      for (int a = 0; a < ss; ++a) {
        for (int b = 0; b < ss; ++b) {
          const Vec2 px(u + (b + 0.5) / ss - 0.5, v + (a + 0.5) / ss - 0.5);
          const auto ray = unproject(intr, px);
          if (!ray) continue;
          acc += ray_color(s, o, R_wc * *ray);
          ++n;
        }
      }
      for (int c = 0; c < 3; ++c) img.at(u, v, c) = float(acc[c] / n);
    }
  }
  return img;
}

Image render_depth(const Scene& s, const Extrinsics& extr, const FisheyeIntrinsics& intr) {
  Image img(intr.width, intr.height, 1);
  const Mat3 R_wc = extr.R_wc();
  const Vec3 o = extr.t_wc();
#pragma omp parallel for schedule(dynamic, 4)
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const auto ray = unproject(intr, Vec2(u, v));
      if (!ray) continue;
      const auto h = cast(s, o, R_wc * *ray);
      if (h) img.at(u, v, 0) = float(h->t);
    }
  }
  return img;
}

std::vector<double> gt_depth_ico(const Scene& s, const Vec3& center, const Icosphere& ico) {
  require(inside_room(s, center), "gt_depth_ico: centre outside the room");
  std::vector<double> d(ico.num_vertices());
  const long long n = static_cast<long long>(d.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto h = cast(s, center, ico.vertices[std::size_t(i)]);
    d[std::size_t(i)] = h->t;
  }
  return d;
}

std::vector<float> ray_cast_ico(const Scene& s, const Vec3& origin, const Icosphere& ico) {
  std::vector<float> out(3 * ico.num_vertices());
  const long long n = static_cast<long long>(ico.num_vertices());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const Vec3 c = ray_color(s, origin, ico.vertices[std::size_t(i)]);
    for (int a = 0; a < 3; ++a) out[3 * std::size_t(i) + a] = float(c[a]);
  }
  return out;
}

CameraRig default_rig(double fov_deg, int image_size, double baseline, const Vec3& center) {
  require(image_size > 1 && baseline >= 0 && fov_deg > 0, "default_rig: bad parameters");
  const Vec3 facing[4] = {Vec3::UnitX(), -Vec3::UnitY(), -Vec3::UnitX(), Vec3::UnitY()};
  CameraRig rig;
  for (int k = 0; k < 4; ++k) {
    const Vec3 z = facing[k];
    const Vec3 x = z.cross(Vec3::UnitZ()).normalized();
    const Vec3 y = z.cross(x);
    Mat3 R_wc;
    R_wc.col(0) = x;
    R_wc.col(1) = y;
    R_wc.col(2) = z;
    Camera cam;
    cam.name = "cam" + std::to_string(k);
    cam.extrinsics = Extrinsics::from_pose(R_wc, center + baseline * z);
    cam.intrinsics = make_equiangular(image_size, image_size, fov_deg);
    cam.calib_path = cam.name + ".calib";
    rig.cameras.push_back(cam);
  }
  return rig;
}

CameraRig rotate_rig(const CameraRig& rig, double pitch_deg) {
  require(pitch_deg >= 0.0 && pitch_deg <= 90.0, "rotate_rig: pitch must lie in [0, 90]");
  CameraRig out = rig;
  for (Camera& cam : out.cameras) {
    const Mat3 R_wc = cam.extrinsics.R_wc();
    const Vec3 pos = cam.extrinsics.t_wc();
    const Mat3 R = axis_angle(R_wc.col(0), -deg2rad(pitch_deg));
    cam.extrinsics = Extrinsics::from_pose(R * R_wc, pos);
  }
  return out;
}

namespace {

bool inside_prop(const Scene& s, const Vec3& p, double margin) {
  for (const auto& sp : s.spheres) {
    if ((p - sp.center).norm() < sp.radius + margin) return true;
  }
  for (const auto& b : s.boxes) {
    const Vec3 l = yaw_matrix(b.yaw_deg).transpose() * (p - b.center);
    if ((l.cwiseAbs().array() < (b.half.array() + margin)).all()) return true;
  }
  return false;
}

}  // namespace

void validate_scene(const Scene& s, const std::vector<Vec3>& points) {
  if (!(s.room_min.array() < s.room_max.array()).all()) throw ValidationError("scene: room bounds are inverted");
  if (!(s.checker > 0)) throw ValidationError("scene: checker size must be positive");
  for (const Vec3& p : points) {
    if (!inside_room(s, p)) throw ValidationError("scene: a rig point lies outside the room");
    if (inside_prop(s, p, 0.0)) throw ValidationError("scene: a prop contains a rig point");
  }
}

Scene random_scene(std::uint64_t seed, const Vec3& center, double clearance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto range = [&](double a, double b) { return a + (b - a) * U(rng); };
  Scene s;
  s.seed = seed;
  s.room_min = center + Vec3(-range(1.8, 2.8), -range(1.8, 2.8), -range(1.0, 1.4));
  s.room_max = center + Vec3(range(1.8, 2.8), range(1.8, 2.8), range(1.0, 1.5));
  s.checker = range(0.5, 0.8);
  s.light.direction = Vec3(range(-0.5, 0.5), range(-0.5, 0.5), -1.0);
  auto fits = [&](const Vec3& lo, const Vec3& hi) {
    return (lo.array() > s.room_min.array() + 0.05).all() && (hi.array() < s.room_max.array() - 0.05).all();
  };
  const int n_spheres = 2 + int(rng() % 2);
  for (int attempt = 0; int(s.spheres.size()) < n_spheres && attempt < 200; ++attempt) {
    const double az = range(0, 2 * kPi), el = range(-0.5, 0.5);
    const double r = range(0.2, 0.45), dist = range(1.0, 1.8);
    const SphereProp sp{center + dist * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)),
                        r};
    if (dist - r < clearance || !fits(sp.center - Vec3::Constant(r), sp.center + Vec3::Constant(r))) continue;
    bool overlap = false;
    for (const auto& o : s.spheres) overlap = overlap || (o.center - sp.center).norm() < o.radius + sp.radius + 0.1;
    if (!overlap) s.spheres.push_back(sp);
  }
  const int n_boxes = 1 + int(rng() % 3);
  for (int attempt = 0; int(s.boxes.size()) < n_boxes && attempt < 200; ++attempt) {
    BoxProp b;
    b.half = Vec3(range(0.15, 0.4), range(0.15, 0.4), range(0.2, 0.6));
    const double az = range(0, 2 * kPi), dist = range(1.0, 2.0);
    b.center = center + dist * Vec3(std::cos(az), std::sin(az), 0.0);
    b.center.z() = s.room_min.z() + b.half.z() + 1e-3;
    b.yaw_deg = range(0, 90);
    const double reach = b.half.head<2>().norm();
    // standing on the floor, so only the top face needs the wall margin
    if (!fits(b.center - Vec3(reach, reach, b.half.z() - 0.1), b.center + Vec3(reach, reach, b.half.z()))) continue;
    Scene probe = s;
    probe.boxes = {b};
    probe.spheres.clear();
    if (inside_prop(probe, center, clearance)) continue;
    bool overlap = false;
    for (const auto& sp : s.spheres) overlap = overlap || (sp.center - b.center).norm() < sp.radius + reach + 0.1;
    for (const auto& o : s.boxes) {
      overlap = overlap || (o.center - b.center).head<2>().norm() < o.half.head<2>().norm() + reach + 0.1;
    }
    if (!overlap) s.boxes.push_back(b);
  }
  return s;
}

namespace {

std::vector<double> numbers(std::istringstream& in, std::size_t n, int line, const std::string& key) {
  std::vector<double> v(n);
  for (auto& x : v) {
    if (!(in >> x)) throw ParseError("'" + key + "' expects " + std::to_string(n) + " numbers", line);
  }
  std::string rest;
  if (in >> rest) throw ParseError("trailing text after '" + key + "'", line);
  return v;
}

}  // namespace

Scene parse_scene(std::string_view text) {
  Scene s;
  std::istringstream all{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(all, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const auto eq = raw.find('=');
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    std::string key = raw.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream in(raw.substr(eq + 1));
    if (key == "seed") {
      std::uint64_t v;
      if (!(in >> v)) throw ParseError("'seed' expects an unsigned integer", line);
      s.seed = v;
    } else if (key == "room") {
      const auto v = numbers(in, 6, line, key);
      s.room_min = Vec3(v[0], v[1], v[2]);
      s.room_max = Vec3(v[3], v[4], v[5]);
    } else if (key == "checker") {
      s.checker = numbers(in, 1, line, key)[0];
    } else if (key == "light") {
      const auto v = numbers(in, 5, line, key);
      s.light = Light{Vec3(v[0], v[1], v[2]), v[3], v[4]};
    } else if (key == "sphere") {
      const auto v = numbers(in, 4, line, key);
      s.spheres.push_back({Vec3(v[0], v[1], v[2]), v[3]});
    } else if (key == "box") {
      const auto v = numbers(in, 7, line, key);
      s.boxes.push_back({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), v[6]});
    } else if (key == "uniform") {
      const auto v = numbers(in, 3, line, key);
      s.uniform_albedo = Vec3(v[0], v[1], v[2]);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  if (!(s.room_min.array() < s.room_max.array()).all()) throw ValidationError("scene: room bounds are inverted");
  if (!(s.checker > 0)) throw ValidationError("scene: checker size must be positive");
  return s;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scene(ss.str());
}

std::string format_scene(const Scene& s) {
  std::ostringstream o;
  o.precision(17);
  o << "seed = " << s.seed << "\n";
  o << "room = " << s.room_min.x() << ' ' << s.room_min.y() << ' ' << s.room_min.z() << ' ' << s.room_max.x() << ' '
    << s.room_max.y() << ' ' << s.room_max.z() << "\n";
  o << "checker = " << s.checker << "\n";
  const Vec3& l = s.light.direction;
  o << "light = " << l.x() << ' ' << l.y() << ' ' << l.z() << ' ' << s.light.ambient << ' ' << s.light.diffuse << "\n";
  for (const auto& sp : s.spheres) {
    o << "sphere = " << sp.center.x() << ' ' << sp.center.y() << ' ' << sp.center.z() << ' ' << sp.radius << "\n";
  }
  for (const auto& b : s.boxes) {
    o << "box = " << b.center.x() << ' ' << b.center.y() << ' ' << b.center.z() << ' ' << b.half.x() << ' '
      << b.half.y() << ' ' << b.half.z() << ' ' << b.yaw_deg << "\n";
  }
  if (s.uniform_albedo) {
    o << "uniform = " << s.uniform_albedo->x() << ' ' << s.uniform_albedo->y() << ' ' << s.uniform_albedo->z() << "\n";
  }
  return o.str();
}

}  // namespace icosweep
