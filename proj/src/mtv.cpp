#include "mtvloop/mtv.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

namespace mtvloop {

const char* to_string(TileLabel label) {
  switch (label) {
    case TileLabel::empty: return "empty";
    case TileLabel::static_: return "static";
    case TileLabel::loop: return "loop";
  }
  return "?";
}

const Image<double>& Tile::frame(int t) const {
  if (label == TileLabel::loop) return loop_patch[wrap_frame(t, int(loop_patch.size()))];
  return static_patch;
}

size_t Mtv::loop_tile_count() const {
  return size_t(std::count_if(tiles.begin(), tiles.end(), [](const Tile& t) { return t.label == TileLabel::loop; }));
}

size_t Mtv::static_tile_count() const {
  return size_t(
      std::count_if(tiles.begin(), tiles.end(), [](const Tile& t) { return t.label == TileLabel::static_; }));
}

void Mtv::validate() const {
  MTV_REQUIRE(tile_size >= 1 && frame_count >= 1, "mtv: invalid tile size or frame count");
  MTV_REQUIRE(stack.size() >= 1, "mtv: empty plane stack");
  auto key = [](const Tile& t) { return std::tuple(t.plane, t.row, t.col); };
  for (size_t i = 0; i < tiles.size(); ++i) {
    const Tile& t = tiles[i];
    MTV_REQUIRE(t.plane >= 0 && t.plane < stack.size() && t.row >= 0 && t.row < grid_rows && t.col >= 0 &&
                    t.col < grid_cols,
                "mtv: tile outside grid");
    if (i > 0) MTV_REQUIRE(key(tiles[i - 1]) < key(t), "mtv: tiles not sorted or not unique");
    auto shape_ok = [&](const Image<double>& p) {
      return p.height() == tile_size && p.width() == tile_size && p.channels() == 4;
    };
    switch (t.label) {
      case TileLabel::empty: throw DataError("mtv: empty tiles must be culled");
      case TileLabel::static_:
        MTV_REQUIRE(shape_ok(t.static_patch) && t.loop_patch.empty(), "mtv: malformed static tile");
        break;
      case TileLabel::loop:
        MTV_REQUIRE(t.static_patch.empty() && int(t.loop_patch.size()) == frame_count, "mtv: malformed loop tile");
        for (const auto& f : t.loop_patch) MTV_REQUIRE(shape_ok(f), "mtv: malformed loop tile frame");
        break;
    }
  }
}

TileGrid subdivide(const Mpi& mpi, const LoopableVolume& loopable, int tile_size) {
  mpi.validate();
  MTV_REQUIRE(tile_size >= 1, "subdivide: tile size must be positive");
  MTV_REQUIRE(int(loopable.values.size()) == mpi.depth_count(), "subdivide: loopable depth mismatch");
  TileGrid grid;
  grid.stack = mpi.stack;
  grid.tile_size = tile_size;
  grid.depth = mpi.depth_count();
  grid.rows = (mpi.height() + tile_size - 1) / tile_size;
  grid.cols = (mpi.width() + tile_size - 1) / tile_size;
  for (int d = 0; d < grid.depth; ++d) {
    MTV_REQUIRE(loopable.values[d].height() == mpi.height() && loopable.values[d].width() == mpi.width(),
                "subdivide: loopable shape mismatch");
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        grid.rgba.push_back(mpi.planes[d].crop(r * tile_size, c * tile_size, tile_size, tile_size));
        grid.loopable.push_back(loopable.values[d].crop(r * tile_size, c * tile_size, tile_size, tile_size));
      }
    }
  }
  return grid;
}

TileLabel classify_tile(std::span<const double> alpha, std::span<const double> loopable, double tau_alpha,
                        double tau_loop) {
  double max_alpha = alpha.empty() ? 0.0 : *std::max_element(alpha.begin(), alpha.end());
  if (max_alpha <= tau_alpha) return TileLabel::empty;
  double max_loop = loopable.empty() ? 0.0 : *std::max_element(loopable.begin(), loopable.end());
  if (max_loop < tau_loop) return TileLabel::static_;
  return TileLabel::loop;
}

std::vector<TileLabel> classify_grid(const TileGrid& grid, double tau_alpha, double tau_loop) {
  std::vector<TileLabel> labels(grid.rgba.size());
  for (size_t i = 0; i < grid.rgba.size(); ++i) {
    Image<double> alpha = grid.rgba[i].channel(3);
    labels[i] = classify_tile(alpha.values(), grid.loopable[i].values(), tau_alpha, tau_loop);
  }
  return labels;
}

namespace {

Mtv empty_like(const TileGrid& grid, int frame_count) {
  Mtv mtv;
  mtv.stack = grid.stack;
  mtv.tile_size = grid.tile_size;
  mtv.frame_count = frame_count;
  mtv.grid_rows = grid.rows;
  mtv.grid_cols = grid.cols;
  return mtv;
}

}  // namespace

Mtv lift_and_cull(const TileGrid& grid, std::span<const TileLabel> labels, int frame_count, double noise_amp,
                  uint64_t seed) {
  MTV_REQUIRE(labels.size() == grid.rgba.size(), "lift_and_cull: label count mismatch");
  MTV_REQUIRE(frame_count >= 1, "lift_and_cull: frame count must be positive");
  MTV_REQUIRE(noise_amp >= 0, "lift_and_cull: noise amplitude must be non-negative");
  Mtv mtv = empty_like(grid, frame_count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-noise_amp, noise_amp);
  for (int d = 0; d < grid.depth; ++d) {
    for (int r = 0; r < grid.rows; ++r) {
      for (int c = 0; c < grid.cols; ++c) {
        size_t idx = grid.cell(d, r, c);
        if (labels[idx] == TileLabel::empty) continue;
        Tile tile{d, r, c, labels[idx], {}, {}};
        if (labels[idx] == TileLabel::static_) {
          tile.static_patch = grid.rgba[idx];
        } else {
          for (int t = 0; t < frame_count; ++t) {
            Image<double> f = grid.rgba[idx];
            if (noise_amp > 0) {
              for (size_t i = 0; i < f.pixel_count(); ++i)
                for (int ch = 0; ch < 3; ++ch) {
                  double& v = f.storage()[i * 4 + ch];
                  v = std::clamp(v + noise(rng), 0.0, 1.0);
                }
            }
            tile.loop_patch.push_back(std::move(f));
          }
        }
        mtv.tiles.push_back(std::move(tile));
      }
    }
  }
  return mtv;
}

Mtv uncoupled_mtv(const Mpi& mpi, int tile_size, int frame_count, bool all_loop) {
  LoopableVolume zeros;
  for (int d = 0; d < mpi.depth_count(); ++d) zeros.values.emplace_back(mpi.height(), mpi.width(), 1);
  TileGrid grid = subdivide(mpi, zeros, tile_size);
  std::vector<TileLabel> labels(grid.rgba.size(), all_loop ? TileLabel::loop : TileLabel::static_);
  return lift_and_cull(grid, labels, frame_count, 0.0, 0);
}

Image<double> resize_bilinear(const Image<double>& src, int out_h, int out_w) {
  MTV_REQUIRE(out_h >= 1 && out_w >= 1 && !src.empty(), "resize_bilinear: invalid size");
  if (out_h == src.height() && out_w == src.width()) return src;
  Image<double> out(out_h, out_w, src.channels());
  const double sy = double(src.height()) / out_h, sx = double(src.width()) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src.height() - 1));
    int y0 = std::min(int(fy), src.height() - 1), y1 = std::min(y0 + 1, src.height() - 1);
    double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src.width() - 1));
      int x0 = std::min(int(fx), src.width() - 1), x1 = std::min(x0 + 1, src.width() - 1);
      double wx = fx - x0;
      for (int ch = 0; ch < src.channels(); ++ch) {
        double top = src(y0, x0, ch) * (1 - wx) + src(y0, x1, ch) * wx;
        double bot = src(y1, x0, ch) * (1 - wx) + src(y1, x1, ch) * wx;
        out(y, x, ch) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Mtv resample_mtv(const Mtv& mtv, double scale) {
  MTV_REQUIRE(scale > 0 && std::isfinite(scale), "resample_mtv: scale must be positive");
  const int ts = int(std::lround(mtv.tile_size * scale));
  MTV_REQUIRE(ts >= 2, "resample_mtv: resulting tile size below 2");
  if (ts == mtv.tile_size) return mtv;
  Mtv out = mtv;
  out.tile_size = ts;
  const double r = double(ts) / mtv.tile_size;
  const CameraModel& ref = mtv.stack.reference;
  out.stack.reference = ref.scaled(r, r, int(std::lround(ref.width * r)), int(std::lround(ref.height * r)));
  for (Tile& t : out.tiles) {
    if (t.label == TileLabel::static_) t.static_patch = resize_bilinear(t.static_patch, ts, ts);
    for (auto& f : t.loop_patch) f = resize_bilinear(f, ts, ts);
  }
  return out;
}

Mpi densify(const Mtv& mtv, int t) {
  Mpi mpi;
  mpi.stack = mtv.stack;
  for (int d = 0; d < mtv.stack.size(); ++d) mpi.planes.emplace_back(mtv.plane_height(), mtv.plane_width(), 4);
  for (const Tile& tile : mtv.tiles) {
    mpi.planes[tile.plane].paste(tile.frame(t), tile.row * mtv.tile_size, tile.col * mtv.tile_size);
  }
  return mpi;
}

uint64_t count_params(const Mtv& mtv) {
  const uint64_t per_patch = uint64_t(mtv.tile_size) * mtv.tile_size * 4;
  uint64_t total = 0;
  for (const Tile& t : mtv.tiles) {
    if (t.label == TileLabel::static_) total += per_patch;
    if (t.label == TileLabel::loop) total += per_patch * uint64_t(mtv.frame_count);
  }
  return total;
}

}  // namespace mtvloop
