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


#include "icosweep/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "icosweep/error.hpp"
#include "icosweep/icosphere.hpp"

namespace icosweep {

int level_for_vertex_count(std::size_t n) {
  for (int l = 0; l <= kDefaultMaxLevel; ++l) {
    if (vertex_count(l) == n) return l;
  }
  throw ContractViolation("no icosphere level has " + std::to_string(n) + " vertices");
}

DepthIndexMap soft_argmax(const Tensor<double>& s) {
  require(s.rank() == 2 && s.dim(1) >= 1, "soft_argmax: expected [V, N]");
  const std::size_t nv = s.dim(0), n = s.dim(1);
  DepthIndexMap out;
  out.level = level_for_vertex_count(nv);
  out.indices.resize(nv);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < nv; ++i) {
    const double* row = s.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0, e = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (p[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < n; ++j) e += double(j + 1) * p[j];
    out.indices[i] = e / z;
  }
  return out;
}

double gt_index(double depth, double d_min, int N) {
  require(depth > 0, "gt_index: depth must be positive");
  require(d_min > 0 && N >= 2, "gt_index: bad sweep parameters");
  return 1.0 + d_min / depth * double(N - 1);
}

double index_to_depth(double index, double d_min, int N) {
  require(d_min > 0 && N >= 2, "index_to_depth: bad sweep parameters");
  if (!(index > 1.0)) return kBeyondFarPlane;
  return d_min * double(N - 1) / (index - 1.0);
}

DepthIndexMap gt_index_map(const std::vector<double>& depths, int level, double d_min, int N) {
  require(depths.size() == vertex_count(level), "gt_index_map: depth count does not match level");
  DepthIndexMap m;
  m.level = level;
  m.indices.resize(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) m.indices[i] = gt_index(depths[i], d_min, N);
  return m;
}

double huber_loss(const DepthIndexMap& pred, const DepthIndexMap& gt, double delta) {
  require(pred.level == gt.level, "huber_loss: level mismatch");
  require(pred.size() == gt.size() && pred.size() > 0, "huber_loss: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = std::abs(pred.indices[i] - gt.indices[i]);
    total += e <= delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
  }
  return total / double(pred.size());
}

Metrics metrics(const std::vector<double>& pred, const std::vector<double>& gt, const std::vector<std::uint8_t>& mask,
                int N) {
  require(pred.size() == gt.size(), "metrics: size mismatch");
  require(mask.empty() || mask.size() == pred.size(), "metrics: mask size mismatch");
  require(N >= 2, "metrics: N must be >= 2");
  Metrics m;
  double sum = 0.0, sq = 0.0;
  std::size_t c1 = 0, c3 = 0, c5 = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double e = 100.0 * std::abs(pred[i] - gt[i]) / double(N);
    sum += e;
    sq += e * e;
    c1 += e > 1.0;
    c3 += e > 3.0;
    c5 += e > 5.0;
    ++m.count;
  }
  require(m.count > 0, "metrics: empty mask");
  const double n = double(m.count);
  m.mae = sum / n;
  m.rms = std::sqrt(sq / n);
  m.gt1 = 100.0 * double(c1) / n;
  m.gt3 = 100.0 * double(c3) / n;
  m.gt5 = 100.0 * double(c5) / n;
  return m;
}

Metrics metrics(const DepthIndexMap& pred, const DepthIndexMap& gt, int N) {
  require(pred.level == gt.level, "metrics: level mismatch");
  return metrics(pred.indices, gt.indices, gt.mask, N);
}

std::string format_metrics(const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "count=%zu\nmae=%.6f\nrms=%.6f\ngt1=%.4f\ngt3=%.4f\ngt5=%.4f\n", m.count, m.mae,
                m.rms, m.gt1, m.gt3, m.gt5);
  return buf;
}

std::string metrics_csv_header() { return "angle,model,gt1,gt3,gt5,mae,rms"; }

std::string metrics_csv_row(double angle, const std::string& model, const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%g,%s,%.4f,%.4f,%.4f,%.6f,%.6f", angle, model.c_str(), m.gt1, m.gt3, m.gt5, m.mae,
                m.rms);
  return buf;
}

std::vector<std::uint8_t> evaluation_mask(const SweepPlan& plan, const std::vector<double>& gt_indices,
                                          int min_cameras) {
  require(gt_indices.size() == plan.num_vertices, "evaluation_mask: size mismatch");
  std::vector<std::uint8_t> mask(plan.num_vertices);
  for (std::size_t i = 0; i < plan.num_vertices; ++i) {
    const double d = std::clamp(std::round(gt_indices[i]), 1.0, double(plan.num_spheres));
    mask[i] = plan.coverage(i, int(d) - 1) >= min_cameras ? 1 : 0;
  }
  return mask;
}

}  // namespace icosweep
