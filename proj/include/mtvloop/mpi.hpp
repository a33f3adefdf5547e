#pragma once

#include <vector>

#include "mtvloop/geometry.hpp"
#include "mtvloop/image.hpp"

namespace mtvloop {

// D straight-alpha RGBA planes, index 0 nearest. Plane rasters live in the
// reference camera's pixel grid (possibly padded beyond its image bounds).
template <class T>
struct BasicMpi {
  std::vector<Image<T>> planes;  // D × (H×W×4)
  PlaneStack stack;

  int depth_count() const { return int(planes.size()); }
  int height() const { return planes.empty() ? 0 : planes[0].height(); }
  int width() const { return planes.empty() ? 0 : planes[0].width(); }

  void validate() const {
    MTV_REQUIRE(!planes.empty(), "mpi: no planes");
    MTV_REQUIRE(int(planes.size()) == stack.size(), "mpi: plane count differs from depth count");
    for (const auto& p : planes)
      MTV_REQUIRE(p.channels() == 4 && p.height() == height() && p.width() == width(), "mpi: plane shape mismatch");
  }

  template <class U>
  BasicMpi<U> cast() const {
    BasicMpi<U> out;
    out.stack = stack;
    for (const auto& p : planes) out.planes.push_back(p.template cast<U>());
    return out;
  }
};

// Per-plane continuous loopable indicator; composited with the paired Mpi's alpha.
template <class T>
struct BasicLoopableVolume {
  std::vector<Image<T>> values;  // D × (H×W×1)

  template <class U>
  BasicLoopableVolume<U> cast() const {
    BasicLoopableVolume<U> out;
    for (const auto& p : values) out.values.push_back(p.template cast<U>());
    return out;
  }
};

using Mpi = BasicMpi<double>;
using LoopableVolume = BasicLoopableVolume<double>;

// A window of a view's image: rows [row, row+h), cols [col, col+w).
struct RenderWindow {
  CameraModel view;
  int row = 0, col = 0;
  int height = 0, width = 0;

  static RenderWindow full(const CameraModel& cam) { return {cam, 0, 0, cam.height, cam.width}; }
  void validate() const {
    MTV_REQUIRE(height > 0 && width > 0, "render window: empty size");
    MTV_REQUIRE(row >= 0 && col >= 0 && row + height <= view.height && col + width <= view.width,
                "render window: outside image bounds");
  }
};

}  // namespace mtvloop
