#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "mtvloop/adam.hpp"
#include "mtvloop/looping.hpp"
#include "mtvloop/mtv.hpp"
#include "mtvloop/scene_io.hpp"

namespace mtvloop {

struct PyramidSchedule {
  double coarsest_scale = 0.24;
  double growth = 1.4;
  int epochs_per_level = 50;

  void validate() const;
};

// coarsest·growth^i while below 1, then exactly 1.0.
std::vector<double> build_schedule(const PyramidSchedule& schedule);

struct Stage2Config {
  PyramidSchedule pyramid;
  PatchConfig patch;
  AdamHyper adam{0.03, 0.9, 0.999, 1e-8};
  double lambda_tv = 0.5;
  bool use_tv = true;
  bool optimize_alpha = true;
  int window_h = 180, window_w = 320;  // at scale 1.0
  int windows_per_view = 1;            // iterations per view in one epoch
  uint64_t seed = 0;

  void validate() const;
};

struct LossSample {
  int level = 0, epoch = 0, iteration = 0;
  double loss = 0;
};

struct Stage2Result {
  Mtv mtv;
  std::vector<LossSample> curve;
  std::vector<double> scales;
};

// Box-filter resize where each output pixel averages the input area it covers.
Image<double> resize_area(const Image<double>& src, int out_h, int out_w);

// Looping loss plus the optional per-frame TV term for one window, with gradients w.r.t.
// every loop-tile texel (indexed like mtv.tiles; static and empty entries stay empty).
struct Stage2Objective {
  double loop = 0, tv = 0;  // tv already carries the λ_tv weight
  std::vector<std::vector<Image<double>>> tile_grads;
};
Stage2Objective stage2_objective(const Mtv& mtv, const Video& input, const RenderWindow& window,
                                 const Stage2Config& config, bool with_grad = true);

// Coarse-to-fine optimization of the loop tiles against every view's clip.
Stage2Result train_stage2(const Mtv& mtv, const std::vector<ViewRecord>& views, const Stage2Config& config);

void write_loss_csv(std::ostream& out, const std::vector<LossSample>& curve);

}  // namespace mtvloop
