#pragma once

#include <vector>

#include "mtvloop/geometry.hpp"
#include "mtvloop/mpi.hpp"

namespace mtvloop {

struct Mtv;

// Back-to-front straight-alpha over: out = c·α + out·(1−α), starting from zero.
// `planes` ordered far→near; the last channel of each is alpha.
template <class T>
Image<T> composite_over(const std::vector<Image<T>>& planes);

template <class T>
struct RenderResult {
  Image<T> rgb;        // h×w×3
  Image<T> loop_mask;  // h×w×1, empty unless a loopable volume was rendered
};

// Forward-pass cache consumed by render_backward. Arrays are plane-major, D×h×w.
template <class T>
struct RenderRecord {
  int depth_count = 0, height = 0, width = 0;
  int plane_height = 0, plane_width = 0;
  bool with_loopable = false;
  std::vector<BilinearTap> taps;
  std::vector<T> samples;       // ×4: warped RGBA
  std::vector<T> loop_samples;  // ×1
  std::vector<T> before;        // ×4: RGB + mask composite before the plane is blended
};

template <class T>
struct MpiGrad {
  std::vector<Image<T>> planes;    // D × (H×W×4)
  std::vector<Image<T>> loopable;  // D × (H×W×1)

  static MpiGrad zeros_like(const BasicMpi<T>& mpi);
  void zero();
};

// Warps every plane into the window of the target view and composites them. When
// `loopable` is given, its values are composited with the same per-plane alpha.
template <class T>
RenderResult<T> render_mpi(const BasicMpi<T>& mpi, const BasicLoopableVolume<T>* loopable,
                           const RenderWindow& window, RenderRecord<T>* record = nullptr);

// Reverse sweep over a recorded forward pass. Accumulates into `grad` (not cleared).
// `d_mask` may be null, in which case the loopable volume receives no gradient.
template <class T>
void render_backward(const RenderRecord<T>& record, const Image<T>& d_rgb, const Image<T>* d_mask,
                     MpiGrad<T>& grad);

// Frame (t mod T) of a Multi-tile Video rendered through the dense path.
Image<double> render_mtv(const Mtv& mtv, int t, const RenderWindow& window);

}  // namespace mtvloop
