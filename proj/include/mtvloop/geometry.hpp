#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mtvloop/camera.hpp"
#include "mtvloop/image.hpp"

namespace mtvloop {

using Homography = Eigen::Matrix3d;

// D fronto-parallel planes in the reference camera frustum, depths strictly increasing.
struct PlaneStack {
  std::vector<double> depths;
  CameraModel reference;

  int size() const { return int(depths.size()); }
  void validate() const;
  bool operator==(const PlaneStack&) const = default;
};

// Depths whose inverses are evenly spaced from 1/near to 1/far.
std::vector<double> disparity_depths(double near, double far, int count);

// Maps target-image pixels to reference-image pixels for the plane z = depth in the
// reference camera frame. Normalized so that H(2,2) == 1 when it is nonzero.
Homography plane_homography(const CameraModel& ref, const CameraModel& tgt, double depth);

// Bilinear sample at (x, y) in pixel-center coordinates; off-image neighbors read as zero.
// Writes `image.channels()` values into `out`.
template <class T>
void sample_bilinear(const Image<T>& image, double x, double y, T* out);

// Inverse warp: each output pixel (x, y) samples `image` at homography·(x, y, 1).
template <class T>
Image<T> warp_bilinear(const Image<T>& image, const Homography& homography, int out_h, int out_w);

// Bilinear footprint of one sample point: up to four texel indices with weights.
struct BilinearTap {
  int x0 = 0, y0 = 0;
  double wx = 0, wy = 0;  // weights of the +1 neighbours
  bool valid = false;     // false when no neighbour lies inside the image

  static BilinearTap at(double x, double y, int height, int width);
};

}  // namespace mtvloop
