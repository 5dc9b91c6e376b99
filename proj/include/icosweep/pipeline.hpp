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
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "icosweep/camera.hpp"
#include "icosweep/config.hpp"
#include "icosweep/network.hpp"
#include "icosweep/regress.hpp"
#include "icosweep/scenegen.hpp"
#include "icosweep/sweep.hpp"

namespace icosweep {

/// Wall-clock seconds per stage, accumulated over calls.
struct Timing {
  double render = 0, projection = 0, extraction = 0, sweep = 0, regularize = 0, regress = 0;
  std::string report() const;
};

/// Network input for one camera: [V, 3] colours shifted by -0.5, zero where invalid.
Tensor<float> image_tensor(const IcoImage& img);

/// Scales valid entries of an image tensor by `gain` and adds `offset`.
void jitter_colors(Tensor<float>& t, const IcoImage& img, float gain, float offset);

/// One multi-camera observation with its ground truth at the output level.
struct Sample {
  std::string name;
  std::vector<IcoImage> images;  // per camera, input level
  std::vector<double> gt_depth;  // per output vertex, meters
  DepthIndexMap gt;              // indices with the evaluation mask
};

/// Samples sharing one rig: sweep plan and per-camera FoV masks.
struct Dataset {
  CameraRig rig;
  SweepPlan plan;
  std::vector<Sample> samples;
};

/// Geometry shared by every stage of a run.
class Context {
 public:
  explicit Context(const RunConfig& cfg);

  const RunConfig& config() const { return cfg_; }
  const Icosphere& ico() const { return ico_; }       // input level, holds all coarser levels
  const Icosphere& ico_out() const { return ico_out_; }  // output level (input - 2)
  const nn::CrownCharts& charts() const { return charts_; }
  const SphereSet& spheres() const { return spheres_; }
  int out_level() const { return cfg_.level - 2; }

  /// Configured rig (file or built-in), pitched down by `pitch_deg`.
  CameraRig rig(double pitch_deg = 0.0) const;
  /// Sweep cache for the rig, persisted under ICOSWEEP_CACHE_DIR when set.
  SweepCache cache(const CameraRig& rig, bool* rebuilt = nullptr) const;
  /// Plan from the rig's cache and FoV masks taken from `images`.
  SweepPlan plan(const CameraRig& rig, const std::vector<IcoImage>& images) const;

  /// Renders, projects and ray-casts ground truth for a generated scene.
  Sample make_sample(const Scene& scene, const CameraRig& rig, Timing* t = nullptr) const;
  Dataset make_dataset(const CameraRig& rig, const std::vector<std::uint64_t>& seeds, Timing* t = nullptr) const;
  /// Recomputes evaluation masks after the plan changes.
  void attach_masks(Dataset& ds) const;

  nn::NetConfig net_config(int num_cameras) const;

 private:
  RunConfig cfg_;
  Icosphere ico_;
  Icosphere ico_out_;
  nn::CrownCharts charts_;
  SphereSet spheres_;
};

/// Predicted indices for one sample.
std::vector<double> predict(nn::IcoSweepNet<float>& net, const Context& ctx, const SweepPlan& plan,
                            const Sample& s, Timing* t = nullptr);
/// Masked metrics pooled over all samples of a dataset.
Metrics evaluate(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& ds, Timing* t = nullptr);
/// Mean unmasked Huber loss over the dataset.
double validation_loss(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& ds);

struct TrainResult {
  std::vector<double> losses;                       // per iteration
  std::vector<std::pair<int, double>> val_losses;   // (iteration, loss)
  Metrics initial_train, final_train, selected_train;
  Metrics initial_val, final_val, selected_val;
  int best_iteration = 0;  // iteration count of the selected weights
  bool has_val = false;
};

/// Adam training with the configured schedule. Leaves the network holding the
/// lowest-validation-loss weights (or the final ones without a validation
/// set). Throws NumericError with a state dump on a non-finite loss.
TrainResult train(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& train_set,
                  const Dataset* val_set, std::ostream* log = nullptr);

/// Ico-feature file: CRWN tensors "values" [V, C] f32 and "valid" [V] u8.
void write_ico_image(const std::string& path, const IcoImage& img);
IcoImage read_ico_image(const std::string& path);
/// Depth-index file: CRWN tensor "indices" [V] f64, optional "mask" [V] u8.
void write_depth_index(const std::string& path, const DepthIndexMap& m);
DepthIndexMap read_depth_index(const std::string& path);

/// Unit direction of ERP pixel (x, y): row 0 is the north pole, the last row
/// the south pole; longitude runs from -pi at x = 0.
Vec3 erp_direction(int x, int y, int width, int height);
/// Barycentric blend of per-vertex values at every ERP pixel.
Image render_erp(const std::vector<double>& values, const Icosphere& ico, int width, int height);
/// Single-channel map to RGB with a jet colormap over [lo, hi].
Image colormap(const Image& gray, double lo, double hi);

}  // namespace icosweep
