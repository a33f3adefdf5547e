// Command-line driver for the multi-tile video pipeline.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mtvloop/config.hpp"
#include "mtvloop/error.hpp"
#include "mtvloop/pipeline.hpp"
#include "mtvloop/scene_io.hpp"

using namespace mtvloop;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset = "default";
  std::string dataset;
  std::string output;
  std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Run configuration (JSON)");
  cmd->add_option("--preset", o.preset, "Base preset when no config is given")
      ->check(CLI::IsMember({"default", "desk"}))
      ->capture_default_str();
  cmd->add_option("-d,--dataset", o.dataset, "Dataset root (overrides the config)");
  cmd->add_option("-o,--output", o.output, "Output workspace (overrides the config)");
  cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig c = o.config_path.empty() ? (o.preset == "desk" ? desk_preset() : RunConfig{}) : load_config(o.config_path);
  if (!o.dataset.empty()) c.dataset = o.dataset;
  if (!o.output.empty()) c.output = o.output;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tile video: 3D looping video reconstruction from multi-view clips"};
  app.require_subcommand(1);

  CommonOptions common;
  auto* prepare = app.add_subcommand("prepare", "Compute per-view average images and loopable masks");
  auto* stage1 = app.add_subcommand("stage1", "Optimize the dense MPI and loopable volume");
  auto* cull = app.add_subcommand("cull", "Tile, classify and cull the stage-1 MPI into an MTV");
  auto* stage2 = app.add_subcommand("stage2", "Coarse-to-fine looping-loss optimization of the MTV");
  auto* eval = app.add_subcommand("eval", "Render the held-out view and report metrics");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage with checkpoints");
  for (auto* cmd : {prepare, stage1, cull, stage2, eval, pipeline}) add_common(cmd, common);
  bool resume = false;
  pipeline->add_flag("--resume", resume, "Skip stages whose checkpoint already exists");

  std::string mtv_path, camera_path, out_dir;
  int first = 0, last = 11;
  auto* render = app.add_subcommand("render", "Render a camera path from an MTV checkpoint");
  render->add_option("--mtv", mtv_path, "MTV checkpoint")->required();
  render->add_option("--cameras", camera_path, "JSON array of cameras")->required();
  render->add_option("--first", first, "First frame index")->capture_default_str();
  render->add_option("--last", last, "Last frame index (inclusive)")->capture_default_str();
  render->add_option("--out", out_dir, "Output directory")->required();

  auto* exp = app.add_subcommand("export", "Pack an MTV checkpoint into a texture-atlas bundle");
  exp->add_option("--mtv", mtv_path, "MTV checkpoint")->required();
  exp->add_option("--out", out_dir, "Bundle directory")->required();

  std::string synth_root;
  int synth_views = 8, synth_frames = 24;
  auto* synth = app.add_subcommand("synth", "Write the synthetic desk-scale dataset");
  synth->add_option("--out", synth_root, "Dataset root")->required();
  synth->add_option("--views", synth_views, "Number of views")->capture_default_str();
  synth->add_option("--frames", synth_frames, "Frames per clip")->capture_default_str();

  std::string dump_preset = "default";
  auto* show = app.add_subcommand("show-config", "Print a preset as JSON");
  show->add_option("--preset", dump_preset, "Preset name")->check(CLI::IsMember({"default", "desk"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : int(ExitCode::usage);
  }

  try {
    if (*prepare) cmd_prepare(resolve(common), std::cout);
    if (*stage1) cmd_stage1(resolve(common), std::cout);
    if (*cull) cmd_cull(resolve(common), std::cout);
    if (*stage2) cmd_stage2(resolve(common), std::cout);
    if (*eval) cmd_eval(resolve(common), std::cout);
    if (*pipeline) cmd_pipeline(resolve(common), resume, std::cout);
    if (*render) cmd_render(mtv_path, camera_path, first, last, out_dir, std::cout);
    if (*exp) cmd_export(mtv_path, out_dir, std::cout);
    if (*synth) {
      make_synthetic_scene(desk_scene_spec(synth_views, synth_frames), synth_root);
      std::cout << "synth: dataset written to " << synth_root << '\n';
    }
    if (*show) std::cout << config_to_json(dump_preset == "desk" ? desk_preset() : RunConfig{}).dump(2) << '\n';
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(ExitCode::data);
  }
  return 0;
}
