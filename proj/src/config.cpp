#include "mtvloop/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace mtvloop {

using nlohmann::json;

void RunConfig::validate() const {
  MTV_REQUIRE(culling.tau_alpha >= 0 && culling.tau_alpha < 1, "config: tau_alpha must lie in [0, 1)");
  MTV_REQUIRE(culling.tau_l > 0 && culling.tau_l < 1, "config: tau_l must lie in (0, 1)");
  MTV_REQUIRE(culling.tile_size >= 2, "config: tile_size must be at least 2");
  MTV_REQUIRE(culling.T >= 1, "config: T must be positive");
  MTV_REQUIRE(culling.noise_amp >= 0, "config: noise_amp must be non-negative");
  MTV_REQUIRE(data.var_thresh >= 0 && data.loop_thresh >= 0 && data.min_period_full_rate >= 2 &&
                  data.full_rate_fps > 0,
              "config: invalid data preparation thresholds");
  MTV_REQUIRE(culling.T >= stage2.patch.temporal_size, "config: T must be at least the temporal patch size s");
  MTV_REQUIRE(!metrics.patches.empty(), "config: metrics need at least one patch config");
  for (const auto& p : metrics.patches) p.validate();
  MTV_REQUIRE(metrics.search.spatial_stride >= 1, "config: metrics spatial_stride must be positive");
  stage1.validate();
  stage2.validate();
}

namespace {

// Reads keys from one JSON object and remembers which ones were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    MTV_REQUIRE(j.is_object(), "config: '" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw DataError("config: unknown key '" + path_ + it.key() + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw DataError("config: wrong type for '" + path_ + key + "'");
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.contains(key) ? j_.at(key) : empty(), path_ + key + ".");
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json patch_to_json(const PatchConfig& p) {
  return {{"k", p.spatial}, {"s", p.temporal_size}, {"d", p.temporal_stride},
          {"rho", std::isinf(p.rho) ? json("inf") : json(p.rho)}, {"circular_padding", p.circular_padding}};
}

void patch_from(Section sec, PatchConfig& p) {
  sec.get("k", p.spatial);
  sec.get("s", p.temporal_size);
  sec.get("d", p.temporal_stride);
  sec.get("circular_padding", p.circular_padding);
  json rho;
  sec.get("rho", rho);
  if (rho.is_string()) {
    MTV_REQUIRE(rho.get<std::string>() == "inf", "config: rho must be a number or \"inf\"");
    p.rho = std::numeric_limits<double>::infinity();
  } else if (rho.is_number()) {
    p.rho = rho.get<double>();
  }
}

}  // namespace

json config_to_json(const RunConfig& c) {
  json spatial = json::array();
  for (const auto& p : c.metrics.patches) spatial.push_back(p.spatial);
  const PatchConfig& mp = c.metrics.patches.front();
  return {
      {"dataset", c.dataset.string()},
      {"output", c.output.string()},
      {"seed", c.seed},
      {"held_out_view", c.held_out_view},
      {"data",
       {{"var_thresh", c.data.var_thresh},
        {"loop_thresh", c.data.loop_thresh},
        {"min_period_full_rate", c.data.min_period_full_rate},
        {"full_rate_fps", c.data.full_rate_fps}}},
      {"stage1",
       {{"lambda_tv", c.stage1.lambda_tv},
        {"lambda_spa", c.stage1.lambda_spa},
        {"D", c.stage1.planes},
        {"window", {c.stage1.window_h, c.stage1.window_w}},
        {"epochs", c.stage1.epochs},
        {"windows_per_view", c.stage1.windows_per_view},
        {"lr", c.stage1.adam.lr},
        {"beta1", c.stage1.adam.beta1},
        {"beta2", c.stage1.adam.beta2},
        {"eps", c.stage1.adam.eps}}},
      {"culling",
       {{"tau_alpha", c.culling.tau_alpha},
        {"tau_l", c.culling.tau_l},
        {"tile_size", c.culling.tile_size},
        {"T", c.culling.T},
        {"noise_amp", c.culling.noise_amp}}},
      {"patch", patch_to_json(c.stage2.patch)},
      {"pyramid",
       {{"coarsest_scale", c.stage2.pyramid.coarsest_scale},
        {"growth", c.stage2.pyramid.growth},
        {"epochs_per_level", c.stage2.pyramid.epochs_per_level}}},
      {"stage2",
       {{"lr", c.stage2.adam.lr},
        {"beta1", c.stage2.adam.beta1},
        {"beta2", c.stage2.adam.beta2},
        {"eps", c.stage2.adam.eps},
        {"lambda_tv", c.stage2.lambda_tv},
        {"use_tv", c.stage2.use_tv},
        {"optimize_alpha", c.stage2.optimize_alpha},
        {"window", {c.stage2.window_h, c.stage2.window_w}},
        {"windows_per_view", c.stage2.windows_per_view}}},
      {"metrics",
       {{"k", spatial},
        {"s", mp.temporal_size},
        {"d", mp.temporal_stride},
        {"spatial_radius", c.metrics.search.spatial_radius},
        {"spatial_stride", c.metrics.search.spatial_stride}}},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  {
    Section root(j, "");
    std::string dataset = c.dataset.string(), output = c.output.string();
    root.get("dataset", dataset);
    root.get("output", output);
    c.dataset = dataset;
    c.output = output;
    root.get("seed", c.seed);
    root.get("held_out_view", c.held_out_view);
    {
      Section s = root.sub("data");
      s.get("var_thresh", c.data.var_thresh);
      s.get("loop_thresh", c.data.loop_thresh);
      s.get("min_period_full_rate", c.data.min_period_full_rate);
      s.get("full_rate_fps", c.data.full_rate_fps);
    }
    {
      Section s = root.sub("stage1");
      s.get("lambda_tv", c.stage1.lambda_tv);
      s.get("lambda_spa", c.stage1.lambda_spa);
      s.get("D", c.stage1.planes);
      std::vector<int> win{c.stage1.window_h, c.stage1.window_w};
      s.get("window", win);
      MTV_REQUIRE(win.size() == 2, "config: stage1.window must be [h, w]");
      c.stage1.window_h = win[0];
      c.stage1.window_w = win[1];
      s.get("epochs", c.stage1.epochs);
      s.get("windows_per_view", c.stage1.windows_per_view);
      s.get("lr", c.stage1.adam.lr);
      s.get("beta1", c.stage1.adam.beta1);
      s.get("beta2", c.stage1.adam.beta2);
      s.get("eps", c.stage1.adam.eps);
    }
    {
      Section s = root.sub("culling");
      s.get("tau_alpha", c.culling.tau_alpha);
      s.get("tau_l", c.culling.tau_l);
      s.get("tile_size", c.culling.tile_size);
      s.get("T", c.culling.T);
      s.get("noise_amp", c.culling.noise_amp);
    }
    patch_from(root.sub("patch"), c.stage2.patch);
    {
      Section s = root.sub("pyramid");
      s.get("coarsest_scale", c.stage2.pyramid.coarsest_scale);
      s.get("growth", c.stage2.pyramid.growth);
      s.get("epochs_per_level", c.stage2.pyramid.epochs_per_level);
    }
    {
      Section s = root.sub("stage2");
      s.get("lr", c.stage2.adam.lr);
      s.get("beta1", c.stage2.adam.beta1);
      s.get("beta2", c.stage2.adam.beta2);
      s.get("eps", c.stage2.adam.eps);
      s.get("lambda_tv", c.stage2.lambda_tv);
      s.get("use_tv", c.stage2.use_tv);
      s.get("optimize_alpha", c.stage2.optimize_alpha);
      std::vector<int> win{c.stage2.window_h, c.stage2.window_w};
      s.get("window", win);
      MTV_REQUIRE(win.size() == 2, "config: stage2.window must be [h, w]");
      c.stage2.window_h = win[0];
      c.stage2.window_w = win[1];
      s.get("windows_per_view", c.stage2.windows_per_view);
    }
    {
      Section s = root.sub("metrics");
      std::vector<int> ks;
      for (const auto& p : c.metrics.patches) ks.push_back(p.spatial);
      PatchConfig base = c.metrics.patches.front();
      s.get("k", ks);
      s.get("s", base.temporal_size);
      s.get("d", base.temporal_stride);
      s.get("spatial_radius", c.metrics.search.spatial_radius);
      s.get("spatial_stride", c.metrics.search.spatial_stride);
      c.metrics.patches.clear();
      for (int k : ks) {
        PatchConfig p = base;
        p.spatial = k;
        c.metrics.patches.push_back(p);
      }
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  MTV_REQUIRE(in.good(), "config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("config: malformed JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

RunConfig desk_preset() {
  RunConfig c;
  c.stage1.planes = 8;
  c.stage1.epochs = 30;
  c.stage1.windows_per_view = 16;
  c.stage1.window_h = 45;
  c.stage1.window_w = 80;
  c.stage2.patch.spatial = 5;
  c.stage2.pyramid.epochs_per_level = 15;
  c.stage2.window_h = 45;
  c.stage2.window_w = 80;
  return c;
}

}  // namespace mtvloop
