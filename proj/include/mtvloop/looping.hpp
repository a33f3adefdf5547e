#pragma once

#include <vector>

#include "mtvloop/image.hpp"

namespace mtvloop {

// Spatio-temporal patch geometry for the looping loss and the metrics.
struct PatchConfig {
  int spatial = 11;          // k, odd
  int temporal_size = 3;     // s
  int temporal_stride = 1;   // d, 1 ≤ d ≤ s
  double rho = 0.0;          // completeness control; +inf selects plain nearest neighbours
  bool circular_padding = true;

  int padding() const { return circular_padding ? temporal_size - temporal_stride : 0; }
  int patch_dim() const { return spatial * spatial * temporal_size * 3; }
  void validate() const;
};

// Flattened k×k×s×3 patches centred on one pixel, ordered [τ][dy][dx][channel].
struct PatchSet {
  std::vector<std::vector<double>> patches;
  std::vector<int> offsets;  // 0-based temporal start of each patch
  int size() const { return int(patches.size()); }
};

// Appends frames V(0..p−1) (cyclically when p > T) after the T frames, p = s − d.
Video circular_pad(const Video& video, const PatchConfig& config);

// Patches starting at 0, d, 2d, … while start + s − 1 ≤ F − 1. The k×k window around
// (row, col) must lie inside the frame.
PatchSet extract_temporal_patches(const Video& video, const PatchConfig& config, int row, int col);

// Row-major n×m table.
struct ScoreTable {
  int rows = 0, cols = 0;
  std::vector<double> values;
  double operator()(int i, int j) const { return values[size_t(i) * cols + j]; }
};

inline constexpr double kNssFloor = 1e-12;

// s_ij = ‖Q_i−K_j‖² / max(ρ + min_k ‖Q_k−K_j‖², 1e-12). For ρ = +inf the limit is
// taken up to a constant factor: s_ij = ‖Q_i−K_j‖².
ScoreTable nss_table(const PatchSet& queries, const PatchSet& keys, double rho);

// Row-wise argmin; ties resolve to the smallest column.
std::vector<int> select_pnn(const ScoreTable& table);

struct LoopingResult {
  double loss = 0;
  Video grad;                  // ∂loss/∂rendered frame, T × (h×w×3); empty if not requested
  int valid_centers = 0;       // (h−k+1)·(w−k+1)
  int query_count = 0;         // n
  int key_count = 0;           // m
  std::vector<int> selection;  // valid_centers × n: f(i) per centre, centres row-major
};

// Patch-nearest-neighbour looping loss between a rendered T-frame loop and an F-frame
// input clip: (1/(n·N)) Σ_centres Σ_i ‖Q_i − K_f(i)‖² with N the number of valid centres.
// The gradient holds the selection fixed and reaches padded copies of each frame.
LoopingResult looping_loss(const Video& rendered, const Video& input, const PatchConfig& config,
                           bool with_grad = true);

}  // namespace mtvloop
