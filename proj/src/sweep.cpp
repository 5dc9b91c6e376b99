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


#include "icosweep/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "icosweep/archive.hpp"
#include "icosweep/error.hpp"

namespace icosweep {

SphereSet sphere_radii(int count, double d_min, double eps) {
  require(count >= 2, "sphere_radii: N must be >= 2");
  require(d_min > 0 && std::isfinite(d_min), "sphere_radii: d_min must be positive");
  require(eps > 0 && std::isfinite(eps), "sphere_radii: eps must be positive");
  SphereSet s{count, d_min, eps, std::vector<double>(std::size_t(count))};
  for (int j = 0; j < count; ++j) {
    const double inv = double(j) / double(count - 1) / d_min + eps;
    s.radii[std::size_t(j)] = 1.0 / inv;
  }
  return s;
}

Vec3 sweep_position(const Camera& cam) {
  const Vec3 p = cam.extrinsics.t_wc();
  Vec3 q;
  for (int a = 0; a < 3; ++a) q[a] = double(std::llround(p[a] * kPositionGrid)) / kPositionGrid;
  return q;
}

Vec3 sweep_center(const CameraRig& rig) {
  Vec3 c = Vec3::Zero();
  for (const Camera& cam : rig.cameras) c += sweep_position(cam);
  return c / double(rig.cameras.size());
}

std::uint64_t sweep_key(const CameraRig& rig, int level, const SphereSet& spheres) {
  Fnv1a h;
  h.value(std::uint32_t(level));
  h.value(std::uint32_t(spheres.count));
  h.value(spheres.d_min);
  h.value(spheres.eps);
  h.value(std::uint32_t(rig.cameras.size()));
  for (const Camera& cam : rig.cameras) {
    const Vec3 p = sweep_position(cam);
    for (int a = 0; a < 3; ++a) h.value(std::int64_t(std::llround(p[a] * kPositionGrid)));
  }
  return h.digest();
}

SweepEntry sweep_entry(const Vec3& center, const Vec3& camera_position, const Vec3& dir, double radius,
                       const Icosphere& ico) {
  SweepEntry e;
  const Vec3 p = center + radius * dir - camera_position;
  const double n = p.norm();
  if (!(n > 1e-12 * std::max(1.0, radius))) return e;
  const Location loc = locate(ico, p / n);
  e.face = loc.face;
  for (int a = 0; a < 3; ++a) e.weights[a] = float(loc.weights[a]);
  e.valid = 1;
  return e;
}

SweepCache build_sweep_cache(const CameraRig& rig, const Icosphere& ico, const SphereSet& spheres) {
  require(!rig.cameras.empty(), "build_sweep_cache: empty rig");
  require(int(spheres.radii.size()) == spheres.count && spheres.count >= 2, "build_sweep_cache: bad sphere set");
  SweepCache c;
  c.level = ico.level;
  c.num_spheres = spheres.count;
  c.num_cameras = int(rig.cameras.size());
  c.d_min = spheres.d_min;
  c.eps = spheres.eps;
  c.rig_hash = sweep_key(rig, ico.level, spheres);
  const std::size_t nv = ico.num_vertices();
  c.entries.resize(std::size_t(c.num_cameras) * nv * std::size_t(c.num_spheres));
  const Vec3 center = sweep_center(rig);
  for (int k = 0; k < c.num_cameras; ++k) {
    const Vec3 pos = sweep_position(rig.cameras[std::size_t(k)]);
    const long long n = static_cast<long long>(nv);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
      for (int j = 0; j < c.num_spheres; ++j) {
        c.entries[c.offset(k, std::size_t(i), j)] =
            sweep_entry(center, pos, ico.vertices[std::size_t(i)], spheres.radii[std::size_t(j)], ico);
      }
    }
  }
  return c;
}

namespace {
constexpr char kMagic[4] = {'S', 'W', 'P', 'C'};
}

void write_sweep_cache(std::ostream& out, const SweepCache& c) {
  BinaryWriter w(out);
  w.bytes(kMagic, 4);
  w.u32(std::uint32_t(c.level));
  w.u32(std::uint32_t(c.num_spheres));
  w.u32(std::uint32_t(c.num_cameras));
  w.f64(c.d_min);
  w.f64(c.eps);
  w.u64(c.rig_hash);
  for (const SweepEntry& e : c.entries) {
    w.u32(e.face);
    for (float x : e.weights) w.f32(x);
    w.u8(e.valid);
  }
  if (!out) throw std::runtime_error("write_sweep_cache: write failed");
}

SweepCache read_sweep_cache(std::istream& in) {
  BinaryReader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ParseError("sweep cache: bad magic");
  SweepCache c;
  c.level = int(r.u32());
  c.num_spheres = int(r.u32());
  c.num_cameras = int(r.u32());
  c.d_min = r.f64();
  c.eps = r.f64();
  c.rig_hash = r.u64();
  if (c.level < 0 || c.level > kDefaultMaxLevel || c.num_spheres < 2 || c.num_cameras < 1 ||
      c.num_cameras > 64 || c.num_spheres > 4096) {
    throw ParseError("sweep cache: implausible header");
  }
  c.entries.resize(std::size_t(c.num_cameras) * c.num_vertices() * std::size_t(c.num_spheres));
  const std::uint32_t nf = std::uint32_t(face_count(c.level));
  for (SweepEntry& e : c.entries) {
    e.face = r.u32();
    for (float& x : e.weights) x = r.f32();
    e.valid = r.u8();
    if (e.face >= nf) throw ParseError("sweep cache: face index out of range");
  }
  return c;
}

void write_sweep_cache(const std::string& path, const SweepCache& cache) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_sweep_cache(f, cache);
}

SweepCache read_sweep_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_sweep_cache(f);
}

std::string cache_dir_from_env() {
  const char* v = std::getenv("ICOSWEEP_CACHE_DIR");
  return v ? std::string(v) : std::string();
}

SweepCache load_or_build_sweep_cache(const CameraRig& rig, const Icosphere& ico, const SphereSet& spheres,
                                     const std::string& dir, bool* rebuilt) {
  const std::uint64_t key = sweep_key(rig, ico.level, spheres);
  std::filesystem::path path;
  if (!dir.empty()) {
    char name[40];
    std::snprintf(name, sizeof name, "sweep-%016llx.swpc", static_cast<unsigned long long>(key));
    path = std::filesystem::path(dir) / name;
    if (std::filesystem::exists(path)) {
      try {
        SweepCache c = read_sweep_cache(path.string());
        if (c.rig_hash == key && c.level == ico.level && c.num_spheres == spheres.count &&
            c.num_cameras == int(rig.cameras.size()) && c.d_min == spheres.d_min && c.eps == spheres.eps) {
          if (rebuilt) *rebuilt = false;
          return c;
        }
      } catch (const std::exception&) {
        // Unreadable or stale file: fall through and rebuild.
      }
    }
  }
  SweepCache c = build_sweep_cache(rig, ico, spheres);
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    write_sweep_cache(path.string(), c);
  }
  if (rebuilt) *rebuilt = true;
  return c;
}

int SweepPlan::coverage(std::size_t i, int j) const {
  int n = 0;
  for (int k = 0; k < num_cameras; ++k) n += usable[offset(k, i, j)];
  return n;
}

SweepPlan make_sweep_plan(const SweepCache& cache, const Icosphere& ico,
                          const std::vector<std::vector<std::uint8_t>>& masks) {
  require(ico.level >= cache.level, "make_sweep_plan: icosphere coarser than the cache");
  require(masks.size() == std::size_t(cache.num_cameras), "make_sweep_plan: one mask per camera required");
  const std::size_t nv = cache.num_vertices();
  for (const auto& m : masks) require(m.empty() || m.size() >= nv, "make_sweep_plan: mask too short");
  SweepPlan p;
  p.level = cache.level;
  p.num_spheres = cache.num_spheres;
  p.num_cameras = cache.num_cameras;
  p.num_vertices = nv;
  const std::size_t n = cache.entries.size();
  p.vertices.resize(n);
  p.weights.resize(n);
  p.usable.resize(n);
  const std::vector<Face>& faces = ico.level_faces[std::size_t(cache.level)];
  for (int k = 0; k < cache.num_cameras; ++k) {
    const auto& mask = masks[std::size_t(k)];
    for (std::size_t i = 0; i < nv; ++i) {
      for (int j = 0; j < cache.num_spheres; ++j) {
        const std::size_t o = cache.offset(k, i, j);
        const SweepEntry& e = cache.entries[o];
        const Face& f = faces[e.face];
        p.vertices[o] = f;
        p.weights[o] = e.weights;
        bool ok = e.valid != 0;
        if (ok && !mask.empty()) ok = mask[f[0]] && mask[f[1]] && mask[f[2]];
        p.usable[o] = ok ? 1 : 0;
      }
    }
  }
  return p;
}

namespace {

template <class T>
void check_features(const std::vector<const Tensor<T>*>& features, const SweepPlan& plan, std::size_t& channels) {
  require(features.size() == std::size_t(plan.num_cameras), "build_cost_volume: one feature map per camera");
  channels = 0;
  for (const Tensor<T>* f : features) {
    require(f && f->rank() == 2 && f->dim(0) >= plan.num_vertices, "build_cost_volume: features must be [V, C]");
    if (channels == 0) channels = f->dim(1);
    require(f->dim(1) == channels, "build_cost_volume: channel counts differ");
  }
}

}  // namespace

template <class T>
Tensor<T> build_cost_volume(const std::vector<const Tensor<T>*>& features, const SweepPlan& plan) {
  std::size_t nc = 0;
  check_features(features, plan, nc);
  const std::size_t nk = features.size(), nn = std::size_t(plan.num_spheres);
  const std::size_t width = plan.channels(nc);
  Tensor<T> out({plan.num_vertices, nn, width});
  const long long nv = static_cast<long long>(plan.num_vertices);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < nv; ++ii) {
    const std::size_t i = std::size_t(ii);
    for (std::size_t j = 0; j < nn; ++j) {
      T* cell = out.data() + (i * nn + j) * width;
      for (std::size_t k = 0; k < nk; ++k) {
        const std::size_t o = plan.offset(int(k), i, int(j));
        if (!plan.usable[o]) continue;
        if (plan.validity_channel) cell[nk * nc + k] = T(1);
        const auto& vs = plan.vertices[o];
        const auto& ws = plan.weights[o];
        const T* f0 = features[k]->data() + std::size_t(vs[0]) * nc;
        const T* f1 = features[k]->data() + std::size_t(vs[1]) * nc;
        const T* f2 = features[k]->data() + std::size_t(vs[2]) * nc;
        const T w0 = T(ws[0]), w1 = T(ws[1]), w2 = T(ws[2]);
        T* dst = cell + k * nc;
        for (std::size_t c = 0; c < nc; ++c) dst[c] = w0 * f0[c] + w1 * f1[c] + w2 * f2[c];
      }
    }
  }
  return out;
}

namespace reference {

template <class T>
Tensor<T> build_cost_volume(const std::vector<const Tensor<T>*>& features, const SweepPlan& plan) {
  std::size_t nc = 0;
  check_features(features, plan, nc);
  const std::size_t nk = features.size(), nn = std::size_t(plan.num_spheres);
  const std::size_t width = plan.channels(nc);
  Tensor<T> out({plan.num_vertices, nn, width});
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t i = 0; i < plan.num_vertices; ++i) {
      for (std::size_t j = 0; j < nn; ++j) {
        const std::size_t o = plan.offset(int(k), i, int(j));
        if (!plan.usable[o]) continue;
        if (plan.validity_channel) out[(i * nn + j) * width + nk * nc + k] = T(1);
        for (std::size_t c = 0; c < nc; ++c) {
          T v = T(0);
          for (int a = 0; a < 3; ++a) {
            v += T(plan.weights[o][a]) * (*features[k])[std::size_t(plan.vertices[o][a]) * nc + c];
          }
          out[(i * nn + j) * width + k * nc + c] = v;
        }
      }
    }
  }
  return out;
}

}  // namespace reference

namespace nn {

template <class T>
Var cost_volume(Graph<T>& g, const std::vector<Var>& features, const SweepPlan& plan) {
  std::vector<const Tensor<T>*> fs;
  bool rg = false;
  for (Var v : features) {
    fs.push_back(&g.value(v));
    rg = rg || g.requires_grad(v);
  }
  Tensor<T> out = icosweep::build_cost_volume(fs, plan);
  const std::size_t nc = fs.front()->dim(1);
  const SweepPlan* pp = &plan;
  return g.record(std::move(out), rg, [features, pp, nc](Graph<T>& gr, const Tensor<T>& gy) {
    const SweepPlan& p = *pp;
    const std::size_t nk = features.size(), nn = std::size_t(p.num_spheres);
    const std::size_t width = p.channels(nc);
    for (std::size_t k = 0; k < nk; ++k) {
      if (!gr.requires_grad(features[k])) continue;
      T* df = gr.grad(features[k]).data();
      for (std::size_t i = 0; i < p.num_vertices; ++i) {
        for (std::size_t j = 0; j < nn; ++j) {
          const std::size_t o = p.offset(int(k), i, int(j));
          if (!p.usable[o]) continue;
          const T* src = gy.data() + (i * nn + j) * width + k * nc;
          for (int a = 0; a < 3; ++a) {
            const T w = T(p.weights[o][a]);
            T* dst = df + std::size_t(p.vertices[o][a]) * nc;
            for (std::size_t c = 0; c < nc; ++c) dst[c] += w * src[c];
          }
        }
      }
    }
  });
}

template Var cost_volume<float>(Graph<float>&, const std::vector<Var>&, const SweepPlan&);
template Var cost_volume<double>(Graph<double>&, const std::vector<Var>&, const SweepPlan&);

}  // namespace nn

template Tensor<float> build_cost_volume<float>(const std::vector<const Tensor<float>*>&, const SweepPlan&);
template Tensor<double> build_cost_volume<double>(const std::vector<const Tensor<double>*>&, const SweepPlan&);
template Tensor<float> reference::build_cost_volume<float>(const std::vector<const Tensor<float>*>&,
                                                           const SweepPlan&);
template Tensor<double> reference::build_cost_volume<double>(const std::vector<const Tensor<double>*>&,
                                                             const SweepPlan&);

}  // namespace icosweep
