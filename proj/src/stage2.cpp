#include "mtvloop/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mtvloop/losses.hpp"
#include "mtvloop/renderer.hpp"

namespace mtvloop {

void PyramidSchedule::validate() const {
  MTV_REQUIRE(coarsest_scale > 0 && coarsest_scale <= 1, "pyramid: coarsest scale must lie in (0, 1]");
  MTV_REQUIRE(growth > 1, "pyramid: growth must exceed 1");
  MTV_REQUIRE(epochs_per_level >= 0, "pyramid: negative epoch count");
}

std::vector<double> build_schedule(const PyramidSchedule& schedule) {
  schedule.validate();
  std::vector<double> scales;
  for (double s = schedule.coarsest_scale; s < 1.0 - 1e-12; s *= schedule.growth) scales.push_back(s);
  scales.push_back(1.0);
  return scales;
}

void Stage2Config::validate() const {
  pyramid.validate();
  patch.validate();
  MTV_REQUIRE(lambda_tv >= 0, "stage2: lambda_tv must be non-negative");
  MTV_REQUIRE(window_h > 0 && window_w > 0 && windows_per_view > 0, "stage2: invalid window settings");
  MTV_REQUIRE(adam.lr > 0 && adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0,
              "stage2: invalid Adam hyperparameters");
}

Image<double> resize_area(const Image<double>& src, int out_h, int out_w) {
  MTV_REQUIRE(out_h >= 1 && out_w >= 1 && !src.empty(), "resize_area: invalid size");
  if (out_h == src.height() && out_w == src.width()) return src;
  // Separable: per axis, every output cell covers [o·scale, (o+1)·scale) of the input.
  auto weights = [](int in, int out) {
    std::vector<std::vector<std::pair<int, double>>> w(out);
    const double scale = double(in) / out;
    for (int o = 0; o < out; ++o) {
      const double a = o * scale, b = (o + 1) * scale;
      for (int i = int(std::floor(a)); i < std::min(in, int(std::ceil(b))); ++i) {
        const double cover = std::min(b, double(i + 1)) - std::max(a, double(i));
        if (cover > 1e-12) w[o].push_back({i, cover / scale});
      }
    }
    return w;
  };
  const auto wy = weights(src.height(), out_h), wx = weights(src.width(), out_w);
  const int c = src.channels();
  Image<double> tmp(src.height(), out_w, c);
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < out_w; ++x)
      for (auto [i, wt] : wx[x])
        for (int ch = 0; ch < c; ++ch) tmp(y, x, ch) += wt * src(y, i, ch);
  Image<double> out(out_h, out_w, c);
  for (int y = 0; y < out_h; ++y)
    for (auto [i, wt] : wy[y])
      for (int x = 0; x < out_w; ++x)
        for (int ch = 0; ch < c; ++ch) out(y, x, ch) += wt * tmp(i, x, ch);
  return out;
}

Stage2Objective stage2_objective(const Mtv& mtv, const Video& input, const RenderWindow& window,
                                 const Stage2Config& config, bool with_grad) {
  window.validate();
  const int frames = mtv.frame_count, ts = mtv.tile_size;
  Stage2Objective obj;
  Video rendered;
  std::vector<RenderRecord<double>> records(with_grad ? frames : 0);
  for (int t = 0; t < frames; ++t) {
    Mpi mpi = densify(mtv, t);
    rendered.push_back(render_mpi<double>(mpi, nullptr, window, with_grad ? &records[t] : nullptr).rgb);
  }
  const Video target = crop_video(input, window.row, window.col, window.height, window.width);
  LoopingResult lr = looping_loss(rendered, target, config.patch, with_grad);
  obj.loop = lr.loss;

  const double tv_norm = double(frames) * mtv.plane_height() * mtv.plane_width();
  if (with_grad) obj.tile_grads.resize(mtv.tiles.size());
  for (size_t i = 0; i < mtv.tiles.size(); ++i) {
    const Tile& tile = mtv.tiles[i];
    if (tile.label != TileLabel::loop) continue;
    if (with_grad) obj.tile_grads[i].assign(frames, Image<double>(ts, ts, 4));
    if (!config.use_tv) continue;
    for (int t = 0; t < frames; ++t)
      obj.tv += config.lambda_tv * tv_patch(tile.loop_patch[t], tv_norm,
                                            with_grad ? &obj.tile_grads[i][t] : nullptr, config.lambda_tv);
  }
  if (!with_grad) return obj;

  Mpi shape;
  shape.stack = mtv.stack;
  for (int d = 0; d < mtv.stack.size(); ++d) shape.planes.emplace_back(mtv.plane_height(), mtv.plane_width(), 4);
  MpiGrad<double> grad = MpiGrad<double>::zeros_like(shape);
  for (int t = 0; t < frames; ++t) {
    grad.zero();
    render_backward<double>(records[t], lr.grad[t], nullptr, grad);
    for (size_t i = 0; i < mtv.tiles.size(); ++i) {
      const Tile& tile = mtv.tiles[i];
      if (tile.label != TileLabel::loop) continue;
      Image<double>& g = obj.tile_grads[i][t];
      const Image<double>& plane = grad.planes[tile.plane];
      for (int y = 0; y < ts; ++y)
        for (int x = 0; x < ts; ++x)
          for (int ch = 0; ch < 4; ++ch) g(y, x, ch) += plane(tile.row * ts + y, tile.col * ts + x, ch);
    }
  }
  if (!config.optimize_alpha)
    for (auto& frames_grad : obj.tile_grads)
      for (auto& g : frames_grad)
        for (size_t p = 0; p < g.pixel_count(); ++p) g.storage()[p * 4 + 3] = 0;
  return obj;
}

namespace {

struct LevelView {
  RenderWindow full;
  Video clip;
};

}  // namespace

Stage2Result train_stage2(const Mtv& mtv, const std::vector<ViewRecord>& views, const Stage2Config& config) {
  config.validate();
  mtv.validate();
  MTV_REQUIRE(!views.empty(), "train_stage2: no views");
  Stage2Result result;
  result.scales = build_schedule(config.pyramid);
  result.mtv = mtv;
  if (mtv.loop_tile_count() == 0) return result;

  const int base_ts = mtv.tile_size;
  const CameraModel base_ref = mtv.stack.reference;
  std::mt19937_64 rng(config.seed ^ 0x5354414745320000ull);
  std::uniform_int_distribution<size_t> pick_view(0, views.size() - 1);

  Mtv current = mtv;
  int level_ts = base_ts;
  for (size_t level = 0; level < result.scales.size(); ++level) {
    const int ts = std::max(2, int(std::lround(base_ts * result.scales[level])));
    if (ts != level_ts) {
      current = resample_mtv(current, double(ts) / level_ts);
      level_ts = ts;
      // Statics come from the stage-1 tiles at every level so they never drift.
      const Mtv statics = ts == base_ts ? mtv : resample_mtv(mtv, double(ts) / base_ts);
      for (size_t i = 0; i < current.tiles.size(); ++i)
        if (current.tiles[i].label == TileLabel::static_) current.tiles[i].static_patch = statics.tiles[i].static_patch;
    }
    const double r = double(ts) / base_ts;
    current.stack.reference = base_ref.scaled(r, r, int(std::lround(base_ref.width * r)),
                                              int(std::lround(base_ref.height * r)));

    std::vector<LevelView> level_views;
    for (const ViewRecord& v : views) {
      LevelView lv;
      const int w = std::max(1, int(std::lround(v.camera.width * r)));
      const int h = std::max(1, int(std::lround(v.camera.height * r)));
      lv.full = RenderWindow::full(v.camera.scaled(double(w) / v.camera.width, double(h) / v.camera.height, w, h));
      for (const auto& f : v.clip.frames) lv.clip.push_back(resize_area(f, h, w));
      level_views.push_back(std::move(lv));
    }

    std::vector<std::span<double>> params;
    for (Tile& tile : current.tiles)
      if (tile.label == TileLabel::loop)
        for (auto& f : tile.loop_patch) params.emplace_back(f.storage());
    AdamState adam;

    const int k = config.patch.spatial;
    const int iterations = int(views.size()) * config.windows_per_view;
    for (int epoch = 0; epoch < config.pyramid.epochs_per_level; ++epoch) {
      for (int it = 0; it < iterations; ++it) {
        const LevelView& lv = level_views[pick_view(rng)];
        const CameraModel& cam = lv.full.view;
        RenderWindow win;
        win.view = cam;
        win.height = std::min(cam.height, std::max(k, int(std::lround(config.window_h * r))));
        win.width = std::min(cam.width, std::max(k, int(std::lround(config.window_w * r))));
        win.row = std::uniform_int_distribution<int>(0, cam.height - win.height)(rng);
        win.col = std::uniform_int_distribution<int>(0, cam.width - win.width)(rng);
        Stage2Objective obj = stage2_objective(current, lv.clip, win, config, true);
        std::vector<std::span<const double>> grads;
        for (size_t i = 0; i < current.tiles.size(); ++i)
          for (const auto& g : obj.tile_grads[i]) grads.emplace_back(g.storage());
        adam_step(params, grads, adam, config.adam, true);
        result.curve.push_back({int(level), epoch, it, obj.loop + obj.tv});
      }
    }
  }
  current.stack.reference = base_ref;
  result.mtv = std::move(current);
  return result;
}

void write_loss_csv(std::ostream& out, const std::vector<LossSample>& curve) {
  out << "level,epoch,iteration,loss\n";
  out.precision(10);
  for (const auto& s : curve) out << s.level << ',' << s.epoch << ',' << s.iteration << ',' << s.loss << '\n';
}

}  // namespace mtvloop
