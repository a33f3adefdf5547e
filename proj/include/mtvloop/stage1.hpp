#pragma once

#include <cstdint>
#include <vector>

#include "mtvloop/adam.hpp"
#include "mtvloop/losses.hpp"
#include "mtvloop/mpi.hpp"
#include "mtvloop/scene_io.hpp"

namespace mtvloop {

struct Stage1Config {
  double lambda_tv = 0.5;
  double lambda_spa = 0.004;
  int planes = 32;  // D
  int window_h = 180, window_w = 320;
  int epochs = 30;
  int windows_per_view = 16;  // iterations per view in one epoch
  AdamHyper adam{0.01, 0.9, 0.999, 1e-8};
  uint64_t seed = 0;

  void validate() const;
};

struct Stage1Result {
  Mpi mpi;
  LoopableVolume loopable;
  std::vector<double> epoch_loss;  // mean stage-1 total per epoch
};

// Index of the view whose camera center is closest to the centroid of all centers.
size_t choose_reference_view(const std::vector<ViewRecord>& views);

// RGB ~ U[0.4, 0.6], α = 0.5, L = 0.5 over the reference camera's H×W raster.
Stage1Result init_stage1(const CameraModel& reference, const std::vector<double>& depths, uint64_t seed);

// Stage-1 objective for one window of one view. Accumulates ∂L/∂(M, L) into `grad` when given.
double stage1_objective(const Mpi& mpi, const LoopableVolume& loopable, const ViewRecord& view,
                        const RenderWindow& window, const Stage1Config& config, MpiGrad<double>* grad,
                        Stage1Losses* parts = nullptr);

// Optimizes a dense MPI and loopable volume against the views' average images and
// 2D loopable masks with random (view, window) sampling; deterministic given the seed.
Stage1Result train_stage1(const std::vector<ViewRecord>& views, const Stage1Config& config, double near, double far);

}  // namespace mtvloop
