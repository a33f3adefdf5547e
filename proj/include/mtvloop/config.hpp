#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtvloop/metrics.hpp"
#include "mtvloop/scene_io.hpp"
#include "mtvloop/stage1.hpp"
#include "mtvloop/stage2.hpp"

namespace mtvloop {

struct CullingConfig {
  double tau_alpha = 0.05;
  double tau_l = 0.5;
  int tile_size = 16;
  int T = 12;
  double noise_amp = 0.01;
};

// Every tunable constant of a run. JSON keys follow the symbols used in the method
// description (tau_alpha, lambda_tv, rho, ...); absent keys keep their defaults.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path output;
  uint64_t seed = 0;
  std::string held_out_view;  // empty: last view by name
  DatasetConfig data;
  Stage1Config stage1;
  CullingConfig culling;
  Stage2Config stage2;  // its patch and pyramid members are the run's looping-loss settings
  MetricsConfig metrics;

  // Throws DataError on out-of-range values. τ_α = 0 is accepted (nothing is culled).
  void validate() const;
};

nlohmann::json config_to_json(const RunConfig& config);
// Unknown keys are rejected so that typos do not silently fall back to defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Desk-scale preset: 8 views at 160×90, D = 8, T = 12, k = 5, 15 epochs per level.
RunConfig desk_preset();

}  // namespace mtvloop
