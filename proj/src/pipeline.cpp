#include "mtvloop/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "mtvloop/atlas.hpp"
#include "mtvloop/checkpoint.hpp"
#include "mtvloop/png_io.hpp"
#include "mtvloop/renderer.hpp"

namespace mtvloop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "mtvloop 1.0.0";

std::string numbered(const char* pattern, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, i);
  return buf;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  MTV_REQUIRE(out.good(), "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_video(const fs::path& dir, const Video& frames) {
  fs::create_directories(dir);
  for (size_t t = 0; t < frames.size(); ++t) write_png(dir / numbered("frame_%04d.png", int(t)), quantize_u8(frames[t]));
}

Dataset load(const RunConfig& config) {
  MTV_REQUIRE(!config.dataset.empty(), "config: dataset path is not set");
  return load_dataset(config.dataset, config.data);
}

Workspace workspace(const RunConfig& config) {
  MTV_REQUIRE(!config.output.empty(), "config: output directory is not set");
  fs::create_directories(config.output);
  return Workspace{config.output};
}

void log_stage(const Workspace& ws, const RunConfig& config, const std::string& stage) {
  json log = json::object();
  if (fs::exists(ws.run_log())) {
    std::ifstream in(ws.run_log());
    log = json::parse(in, nullptr, false);
    if (log.is_discarded()) log = json::object();
  }
  log["version"] = kVersion;
  log["seed"] = config.seed;
  log["config"] = config_to_json(config);
  log["stages"][stage] = "done";
  write_json_file(ws.run_log(), log);
}

}  // namespace

ViewSplit split_views(const Dataset& dataset, const std::string& name) {
  MTV_REQUIRE(dataset.views.size() >= 2, "split_views: need at least 2 views");
  size_t idx = dataset.views.size() - 1;
  if (!name.empty()) {
    idx = dataset.views.size();
    for (size_t i = 0; i < dataset.views.size(); ++i)
      if (dataset.views[i].name == name) idx = i;
    MTV_REQUIRE(idx < dataset.views.size(), "split_views: no view named '" + name + "'");
  }
  ViewSplit split;
  for (size_t i = 0; i < dataset.views.size(); ++i) {
    if (i == idx)
      split.held_out = dataset.views[i];
    else
      split.train.push_back(dataset.views[i]);
  }
  return split;
}

Stage1Result run_stage1(const std::vector<ViewRecord>& train, const SceneInfo& scene, const RunConfig& config) {
  Stage1Config s1 = config.stage1;
  s1.seed = config.seed;
  Stage1Result r = train_stage1(train, s1, scene.near, scene.far);
  quantize_to_f32(r.mpi, r.loopable);
  return r;
}

Mtv run_cull(const Mpi& mpi, const LoopableVolume& loopable, const RunConfig& config, std::ostream& log) {
  const CullingConfig& c = config.culling;
  if (c.tau_alpha == 0)
    log << "warning: tau_alpha = 0 culls only fully transparent tiles (dense fallback)\n";
  TileGrid grid = subdivide(mpi, loopable, c.tile_size);
  std::vector<TileLabel> labels = classify_grid(grid, c.tau_alpha, c.tau_l);
  Mtv mtv = lift_and_cull(grid, labels, c.T, c.noise_amp, config.seed + 1);
  quantize_to_f32(mtv);
  log << "cull: " << mtv.static_tile_count() << " static, " << mtv.loop_tile_count() << " loop of "
      << labels.size() << " tiles; " << count_params(mtv) << " parameters\n";
  return mtv;
}

Stage2Result run_stage2(const Mtv& mtv, const std::vector<ViewRecord>& train, const RunConfig& config) {
  Stage2Config s2 = config.stage2;
  s2.seed = config.seed + 2;
  Stage2Result r = train_stage2(mtv, train, s2);
  quantize_to_f32(r.mtv);
  return r;
}

Video render_frames(const Mtv& mtv, const CameraModel& camera, int first, int last) {
  MTV_REQUIRE(last >= first, "render: empty frame range");
  camera.validate();
  Video out;
  for (int t = first; t <= last; ++t) out.push_back(render_mtv(mtv, t, RenderWindow::full(camera)));
  return out;
}

Evaluation run_eval(const Mtv& mtv, const ViewRecord& held_out, const MetricsConfig& config) {
  Evaluation e;
  e.rendered = render_frames(mtv, held_out.camera, 0, mtv.frame_count - 1);
  e.report = evaluate(e.rendered, held_out.clip.frames, config);
  e.static_baseline_stderr = stderr_metric(Video{held_out.average_image, held_out.average_image}, held_out.clip.frames);
  return e;
}

void cmd_prepare(const RunConfig& config, std::ostream& log) {
  const Dataset ds = load(config);
  const Workspace ws = workspace(config);
  fs::create_directories(ws.prepare_dir());
  json summary = json::array();
  for (const ViewRecord& v : ds.views) {
    write_png(ws.prepare_dir() / (v.name + "_average.png"), quantize_u8(v.average_image));
    write_png(ws.prepare_dir() / (v.name + "_loopmask.png"), quantize_u8(v.loopable_mask2d));
    double frac = 0;
    for (double m : v.loopable_mask2d.storage()) frac += m;
    frac /= double(v.loopable_mask2d.size());
    summary.push_back({{"view", v.name}, {"frames", v.clip.frame_count()}, {"loopable_fraction", frac}});
  }
  write_json_file(ws.prepare_dir() / "summary.json", summary);
  log << "prepare: " << ds.views.size() << " views written to " << ws.prepare_dir().string() << '\n';
  log_stage(ws, config, "prepare");
}

void cmd_stage1(const RunConfig& config, std::ostream& log) {
  const Dataset ds = load(config);
  const Workspace ws = workspace(config);
  const ViewSplit split = split_views(ds, config.held_out_view);
  log << "stage1: training on " << split.train.size() << " views, held out " << split.held_out.name << '\n';
  Stage1Result r = run_stage1(split.train, ds.scene, config);
  if (!r.epoch_loss.empty()) log << "stage1: final epoch loss " << r.epoch_loss.back() << '\n';
  save_stage1_checkpoint(ws.stage1_checkpoint(), r.mpi, r.loopable);
  log_stage(ws, config, "stage1");
}

void cmd_cull(const RunConfig& config, std::ostream& log) {
  const Workspace ws = workspace(config);
  const Stage1Checkpoint ck = load_stage1_checkpoint(ws.stage1_checkpoint());
  save_mtv(ws.culled_checkpoint(), run_cull(ck.mpi, ck.loopable, config, log));
  log_stage(ws, config, "cull");
}

void cmd_stage2(const RunConfig& config, std::ostream& log) {
  const Dataset ds = load(config);
  const Workspace ws = workspace(config);
  const ViewSplit split = split_views(ds, config.held_out_view);
  const Mtv mtv = load_mtv(ws.culled_checkpoint());
  Stage2Result r = run_stage2(mtv, split.train, config);
  save_mtv(ws.stage2_checkpoint(), r.mtv);
  std::ofstream csv(ws.loss_csv(), std::ios::trunc);
  write_loss_csv(csv, r.curve);
  if (!r.curve.empty()) log << "stage2: final loss " << r.curve.back().loss << '\n';
  log_stage(ws, config, "stage2");
}

Evaluation cmd_eval(const RunConfig& config, std::ostream& log) {
  const Dataset ds = load(config);
  const Workspace ws = workspace(config);
  const ViewSplit split = split_views(ds, config.held_out_view);
  const Mtv mtv = load_mtv(ws.stage2_checkpoint());
  Evaluation e = run_eval(mtv, split.held_out, config.metrics);
  json j = report_to_json(e.report);
  j["held_out_view"] = split.held_out.name;
  j["static_baseline_stderr"] = e.static_baseline_stderr;
  j["params"] = count_params(mtv);
  write_json_file(ws.metrics_json(), j);
  write_video(ws.heldout_dir(), e.rendered);
  log << report_table(e.report) << "static baseline STDerr " << e.static_baseline_stderr << '\n';
  log_stage(ws, config, "eval");
  return e;
}

void cmd_export(const fs::path& mtv_path, const fs::path& out_dir, std::ostream& log) {
  const Mtv mtv = load_mtv(mtv_path);
  write_bundle(out_dir, pack(mtv));
  log << "export: " << mtv.tiles.size() << " tiles written to " << out_dir.string() << '\n';
}

void cmd_render(const fs::path& mtv_path, const fs::path& camera_path, int first, int last, const fs::path& out_dir,
                std::ostream& log) {
  const Mtv mtv = load_mtv(mtv_path);
  std::ifstream in(camera_path);
  MTV_REQUIRE(in.good(), "render: cannot open camera path " + camera_path.string());
  json j = json::parse(in, nullptr, false);
  MTV_REQUIRE(!j.is_discarded(), "render: malformed JSON in " + camera_path.string());
  if (j.is_object() && j.contains("cameras")) j = j.at("cameras");
  MTV_REQUIRE(j.is_array(), "render: camera path must be a JSON array of cameras");
  MTV_REQUIRE(!j.empty(), "render: camera path is empty");
  MTV_REQUIRE(last >= first, "render: empty frame range");
  std::vector<CameraModel> path;
  for (const auto& c : j) path.push_back(camera_from_json(c));

  fs::create_directories(out_dir);
  json frames = json::array();
  for (int t = first; t <= last; ++t) {
    // The path repeats when it is shorter than the frame range.
    const size_t pose = size_t(t - first) % path.size();
    const Image<double> img = render_mtv(mtv, t, RenderWindow::full(path[pose]));
    const std::string name = numbered("frame_%04d.png", t - first);
    write_png(out_dir / name, quantize_u8(img));
    frames.push_back({{"file", name}, {"t", t}, {"loop_frame", wrap_frame(t, mtv.frame_count)}, {"pose", pose}});
  }
  write_json_file(out_dir / "manifest.json", {{"version", kVersion}, {"frame_count", mtv.frame_count}, {"frames", frames}});
  log << "render: " << frames.size() << " frames written to " << out_dir.string() << '\n';
}

Evaluation cmd_pipeline(const RunConfig& config, bool resume, std::ostream& log) {
  config.validate();
  const Workspace ws = workspace(config);
  log << kVersion << ", seed " << config.seed << '\n';
  auto stage = [&](const char* name, const fs::path& artifact, auto&& run) {
    if (resume && fs::exists(artifact)) {
      log << name << ": resuming from " << artifact.string() << '\n';
      return;
    }
    try {
      run();
    } catch (const NumericError& e) {
      throw NumericError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(name) + ": " + e.what());
    }
  };
  stage("prepare", ws.prepare_dir() / "summary.json", [&] { cmd_prepare(config, log); });
  stage("stage1", ws.stage1_checkpoint(), [&] { cmd_stage1(config, log); });
  stage("cull", ws.culled_checkpoint(), [&] { cmd_cull(config, log); });
  stage("stage2", ws.stage2_checkpoint(), [&] { cmd_stage2(config, log); });
  Evaluation e;
  stage("eval", fs::path(), [&] { e = cmd_eval(config, log); });
  stage("export", fs::path(), [&] { cmd_export(ws.stage2_checkpoint(), ws.bundle_dir(), log); });
  return e;
}

}  // namespace mtvloop
