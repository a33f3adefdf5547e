#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtvloop/mpi.hpp"

namespace mtvloop {

enum class TileLabel : uint8_t { empty = 0, static_ = 1, loop = 2 };

const char* to_string(TileLabel label);

struct Tile {
  int plane = 0, row = 0, col = 0;
  TileLabel label = TileLabel::empty;
  Image<double> static_patch;             // ts×ts×4 when static
  std::vector<Image<double>> loop_patch;  // T × (ts×ts×4) when loop

  const Image<double>& frame(int t) const;
  bool operator==(const Tile&) const = default;
};

// Sparse multi-plane video: tiles sorted by (plane, row, col), at most one per cell.
// Plane rasters are grid_rows·tile_size × grid_cols·tile_size in the reference camera's pixel grid.
struct Mtv {
  std::vector<Tile> tiles;
  PlaneStack stack;
  int tile_size = 16;
  int frame_count = 12;  // T
  int grid_rows = 0, grid_cols = 0;

  int plane_height() const { return grid_rows * tile_size; }
  int plane_width() const { return grid_cols * tile_size; }
  size_t loop_tile_count() const;
  size_t static_tile_count() const;

  // Throws unless tiles are sorted, unique, in range, and shaped to match their labels.
  void validate() const;
  bool operator==(const Mtv&) const = default;
};

// Per-cell RGBA and loopable values after subdividing every plane.
struct TileGrid {
  PlaneStack stack;
  int tile_size = 16;
  int rows = 0, cols = 0, depth = 0;
  std::vector<Image<double>> rgba;      // depth·rows·cols cells, ts×ts×4
  std::vector<Image<double>> loopable;  // ts×ts×1

  size_t cell(int plane, int row, int col) const { return (size_t(plane) * rows + row) * cols + col; }
};

// Partitions each plane into tile_size² cells; non-divisible planes are padded with zeros (α = 0).
TileGrid subdivide(const Mpi& mpi, const LoopableVolume& loopable, int tile_size);

// Culling rule: empty if max α ≤ τ_α; static if max α > τ_α and max loopable < τ_l; loop otherwise.
TileLabel classify_tile(std::span<const double> alpha, std::span<const double> loopable, double tau_alpha,
                        double tau_loop);
std::vector<TileLabel> classify_grid(const TileGrid& grid, double tau_alpha, double tau_loop);

// Drops empty cells, keeps static cells as one patch, and lifts loop cells to T frames with
// i.i.d. uniform RGB noise in [−noise_amp, noise_amp] (clamped to [0,1]); alpha is copied.
Mtv lift_and_cull(const TileGrid& grid, std::span<const TileLabel> labels, int frame_count, double noise_amp,
                  uint64_t seed);

// Every cell kept; labels forced to static (or loop when `all_loop`), without noise.
Mtv uncoupled_mtv(const Mpi& mpi, int tile_size, int frame_count, bool all_loop = false);

// Bilinearly resamples every tile to round(tile_size·scale) texels; tiles keep their footprint
// so the reference intrinsics are rescaled accordingly.
Mtv resample_mtv(const Mtv& mtv, double scale);

// Frame (t mod T) as a dense Mpi; absent cells are zero.
Mpi densify(const Mtv& mtv, int t);

// Static tiles: ts²·4 values; loop tiles: T·ts²·4.
uint64_t count_params(const Mtv& mtv);

// Bilinear resize of one patch with edge clamping (texel-center aligned).
Image<double> resize_bilinear(const Image<double>& src, int out_h, int out_w);

inline int wrap_frame(int t, int period) { return ((t % period) + period) % period; }

}  // namespace mtvloop
