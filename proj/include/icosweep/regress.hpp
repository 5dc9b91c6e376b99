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
#include <limits>
#include <string>
#include <vector>

#include "icosweep/sweep.hpp"
#include "icosweep/tensor.hpp"

namespace icosweep {

/// Per-vertex inverse-depth indices in [1, N] with an optional evaluation mask.
struct DepthIndexMap {
  int level = 0;
  std::vector<double> indices;
  std::vector<std::uint8_t> mask;  // empty: every vertex counts

  std::size_t size() const { return indices.size(); }
};

/// Level whose vertex count is `n`; throws if there is none.
int level_for_vertex_count(std::size_t n);

/// Expected sphere index (1..N) under a row-wise softmax of a [V, N] score.
DepthIndexMap soft_argmax(const Tensor<double>& scores);

/// D = 1 + (d_min / d) (N - 1).
double gt_index(double depth, double d_min, int N);
/// Inverse of gt_index; returns kBeyondFarPlane for D <= 1.
double index_to_depth(double index, double d_min, int N);
inline constexpr double kBeyondFarPlane = std::numeric_limits<double>::infinity();

DepthIndexMap gt_index_map(const std::vector<double>& depths, int level, double d_min, int N);

/// Mean Huber loss over all vertices (mask ignored).
double huber_loss(const DepthIndexMap& pred, const DepthIndexMap& gt, double delta = 1.0);

/// Error statistics of E(i) = 100 |pred - gt| / N over the masked vertices.
struct Metrics {
  double mae = 0.0;
  double rms = 0.0;
  double gt1 = 0.0;  // % of vertices with E > 1
  double gt3 = 0.0;
  double gt5 = 0.0;
  std::size_t count = 0;
};

/// `mask` empty means all vertices. Throws when no vertex is selected.
Metrics metrics(const std::vector<double>& pred, const std::vector<double>& gt, const std::vector<std::uint8_t>& mask,
                int N);
Metrics metrics(const DepthIndexMap& pred, const DepthIndexMap& gt, int N);

/// key=value lines.
std::string format_metrics(const Metrics& m);
/// angle,model,gt1,gt3,gt5,mae,rms
std::string metrics_csv_header();
std::string metrics_csv_row(double angle, const std::string& model, const Metrics& m);

/// Vertices seen by at least `min_cameras` usable samples at the sphere
/// nearest to their ground-truth index.
std::vector<std::uint8_t> evaluation_mask(const SweepPlan& plan, const std::vector<double>& gt_indices,
                                          int min_cameras = 2);

}  // namespace icosweep
