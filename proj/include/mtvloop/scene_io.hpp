#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtvloop/camera.hpp"
#include "mtvloop/image.hpp"
#include "mtvloop/mpi.hpp"

namespace mtvloop {

namespace fs = std::filesystem;

struct VideoClip {
  Video frames;  // F × (H×W×3), values in [0,1]
  double fps = 25.0;

  int frame_count() const { return int(frames.size()); }
  int height() const { return frames.empty() ? 0 : frames[0].height(); }
  int width() const { return frames.empty() ? 0 : frames[0].width(); }
  void validate() const;
};

struct ViewRecord {
  std::string name;
  VideoClip clip;
  CameraModel camera;
  Image<double> average_image;    // H×W×3
  Image<double> loopable_mask2d;  // H×W×1, values in {0,1}
};

// Optional root/scene.json.
struct SceneInfo {
  double near = 1.0;
  double far = 100.0;
  double fps = 25.0;
};

struct DatasetConfig {
  double var_thresh = 1e-3;
  double loop_thresh = 5e-3;
  int min_period_full_rate = 8;  // frames at `full_rate_fps`; scaled by the clip fps
  double full_rate_fps = 25.0;
};

struct Dataset {
  std::vector<ViewRecord> views;  // sorted by name
  SceneInfo scene;
};

// Reads root/view_*/frame_%04d.png + camera.json (+ optional root/scene.json) and
// computes per-view average images and loopable masks.
Dataset load_dataset(const fs::path& root, const DatasetConfig& config = {});

SceneInfo read_scene_info(const fs::path& root);
void write_scene_info(const fs::path& root, const SceneInfo& info);

Image<double> average_image(const VideoClip& clip);

// Minimum loop period for a clip at `fps` (at least 2 frames).
int min_period_frames(const DatasetConfig& config, double fps);

// 1 where the temporal variance exceeds var_thresh and some (t0, P ≥ min_period) has a
// 3×3-averaged wrap mismatch ‖V(t0) − V(t0+P)‖² below loop_thresh.
Image<double> loopable_mask2d(const VideoClip& clip, double var_thresh, double loop_thresh, int min_period);

// --- synthetic scenes -------------------------------------------------------

// A plane of the synthetic scene; texture coordinates are reference-camera pixels.
struct SyntheticPlane {
  double depth = 1.0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // opaque rectangle [x0,x1)×[y0,y1); elsewhere α = 0
  int period = 0;                      // animation period in frames, 0 = static
  double amplitude = 0.3;              // animation amplitude
  double wavelength = 12.0;            // texture feature size in pixels
  uint64_t seed = 0;
};

struct SceneSpec {
  CameraModel reference;             // defines the texture raster
  std::vector<CameraModel> cameras;  // one per view
  std::vector<int> start_frames;     // per-view clip start time (asynchronous capture)
  std::vector<SyntheticPlane> planes;
  int frame_count = 24;
  double fps = 25.0;
  double near = 1.0, far = 10.0;
  int mpi_planes = 8;  // depth count of the ground-truth MPI written alongside
};

struct SyntheticScene {
  std::vector<VideoClip> clips;          // exactly as written (8-bit quantized)
  std::vector<Image<double>> gt_masks;   // per-view rendered animation indicator > 0.5
  Mpi gt_mpi;                            // time-averaged scene snapped to the MPI stack
  LoopableVolume gt_loopable;            // 1 on animated texels
};

// RGBA raster of one synthetic plane at absolute time `time`.
Image<double> synthetic_plane_rgba(const SyntheticPlane& plane, int height, int width, int time);

// Renders every view with the MPI compositing model and writes the dataset layout
// plus ground_truth/ (loop masks as PNG, gt_mpi as a stage-1 checkpoint).
SyntheticScene make_synthetic_scene(const SceneSpec& spec, const fs::path& root);

// Eight face-forward views at 160×90 with a static background, a static occluder and
// one animated (period-6) region; the desk-scale fixture used by tests and presets.
SceneSpec desk_scene_spec(int views = 8, int frame_count = 24);

}  // namespace mtvloop
