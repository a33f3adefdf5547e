#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mtvloop/config.hpp"
#include "mtvloop/metrics.hpp"
#include "mtvloop/mtv.hpp"
#include "mtvloop/scene_io.hpp"
#include "mtvloop/stage1.hpp"
#include "mtvloop/stage2.hpp"

namespace mtvloop {

// Fixed artifact names inside a run's output directory.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path prepare_dir() const { return root / "prepare"; }
  std::filesystem::path stage1_checkpoint() const { return root / "stage1.ckpt"; }
  std::filesystem::path culled_checkpoint() const { return root / "culled.mtv"; }
  std::filesystem::path stage2_checkpoint() const { return root / "stage2.mtv"; }
  std::filesystem::path loss_csv() const { return root / "stage2_loss.csv"; }
  std::filesystem::path metrics_json() const { return root / "metrics.json"; }
  std::filesystem::path heldout_dir() const { return root / "heldout_render"; }
  std::filesystem::path bundle_dir() const { return root / "bundle"; }
  std::filesystem::path run_log() const { return root / "run.json"; }
};

struct ViewSplit {
  std::vector<ViewRecord> train;
  ViewRecord held_out;
};

// Held-out view is `name` when given, otherwise the last view by name.
ViewSplit split_views(const Dataset& dataset, const std::string& name);

// In-process stages. `log` receives progress lines and warnings.
Stage1Result run_stage1(const std::vector<ViewRecord>& train, const SceneInfo& scene, const RunConfig& config);
Mtv run_cull(const Mpi& mpi, const LoopableVolume& loopable, const RunConfig& config, std::ostream& log);
Stage2Result run_stage2(const Mtv& mtv, const std::vector<ViewRecord>& train, const RunConfig& config);

// Frames t = first..last (inclusive) of the loop seen from `camera`.
Video render_frames(const Mtv& mtv, const CameraModel& camera, int first, int last);

struct Evaluation {
  MetricReport report;
  double static_baseline_stderr = 0;  // STDerr of a video with no temporal variation
  Video rendered;                     // T frames of the held-out view
};
Evaluation run_eval(const Mtv& mtv, const ViewRecord& held_out, const MetricsConfig& config);

// CLI-level commands operating on the workspace at config.output.
void cmd_prepare(const RunConfig& config, std::ostream& log);
void cmd_stage1(const RunConfig& config, std::ostream& log);
void cmd_cull(const RunConfig& config, std::ostream& log);
void cmd_stage2(const RunConfig& config, std::ostream& log);
Evaluation cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_export(const std::filesystem::path& mtv_path, const std::filesystem::path& out_dir, std::ostream& log);

// Reads a JSON array of cameras (or {"cameras": [...]}) and writes frame_%04d.png per
// (pose, t) plus manifest.json into out_dir.
void cmd_render(const std::filesystem::path& mtv_path, const std::filesystem::path& camera_path, int first, int last,
                const std::filesystem::path& out_dir, std::ostream& log);

// All stages in order with a checkpoint after each; with `resume`, stages whose
// checkpoint already exists are skipped.
Evaluation cmd_pipeline(const RunConfig& config, bool resume, std::ostream& log);

}  // namespace mtvloop
