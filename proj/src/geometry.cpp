#include "mtvloop/geometry.hpp"

#include <cmath>

namespace mtvloop {

void PlaneStack::validate() const {
  MTV_REQUIRE(depths.size() >= 2, "plane stack: need at least 2 planes");
  MTV_REQUIRE(depths.front() > 0, "plane stack: near depth must be positive");
  for (size_t i = 1; i < depths.size(); ++i)
    MTV_REQUIRE(depths[i] > depths[i - 1], "plane stack: depths must be strictly increasing");
  reference.validate();
}

std::vector<double> disparity_depths(double near, double far, int count) {
  MTV_REQUIRE(count >= 2, "disparity_depths: need at least 2 planes");
  MTV_REQUIRE(near > 0 && far > near && std::isfinite(far), "disparity_depths: invalid depth range");
  double dn = 1.0 / near, df = 1.0 / far;
  // Adjacent disparities must stay distinguishable or the stack degenerates.
  MTV_REQUIRE((dn - df) / (count - 1) > 1e-9 * dn, "disparity_depths: invalid depth range (near ~ far)");
  std::vector<double> depths(count);
  for (int k = 0; k < count; ++k) {
    double disp = dn + (df - dn) * double(k) / double(count - 1);
    depths[k] = 1.0 / disp;
  }
  depths.front() = near;
  depths.back() = far;
  return depths;
}

Homography plane_homography(const CameraModel& ref, const CameraModel& tgt, double depth) {
  MTV_REQUIRE(depth > 0, "plane_homography: depth must be positive");
  Eigen::Matrix3d r_rel = tgt.rotation * ref.rotation.transpose();
  Eigen::Vector3d t_rel = tgt.translation - r_rel * ref.translation;
  Eigen::Vector3d normal(0, 0, 1);
  Eigen::Matrix3d plane_map = r_rel + t_rel * normal.transpose() / depth;
  // det(plane_map) = 1 - c_z/depth with c the target center in the reference frame.
  double det = plane_map.determinant();
  if (!(std::abs(det) > 1e-12)) throw DataError("plane_homography: camera center lies on the plane");
  Homography ref_to_tgt = tgt.intrinsics() * plane_map * ref.intrinsics().inverse();
  Homography h = ref_to_tgt.inverse();
  if (std::abs(h(2, 2)) > 1e-300) h /= h(2, 2);
  return h;
}

BilinearTap BilinearTap::at(double x, double y, int height, int width) {
  BilinearTap tap;
  if (!std::isfinite(x) || !std::isfinite(y)) return tap;
  double fx = std::floor(x), fy = std::floor(y);
  if (fx < -1 || fy < -1 || fx > width - 1 || fy > height - 1) return tap;
  tap.x0 = int(fx);
  tap.y0 = int(fy);
  tap.wx = x - fx;
  tap.wy = y - fy;
  tap.valid = true;
  return tap;
}

template <class T>
void sample_bilinear(const Image<T>& image, double x, double y, T* out) {
  const int c = image.channels();
  for (int ch = 0; ch < c; ++ch) out[ch] = T(0);
  BilinearTap tap = BilinearTap::at(x, y, image.height(), image.width());
  if (!tap.valid) return;
  const double w[4] = {(1 - tap.wx) * (1 - tap.wy), tap.wx * (1 - tap.wy), (1 - tap.wx) * tap.wy, tap.wx * tap.wy};
  const int xs[4] = {tap.x0, tap.x0 + 1, tap.x0, tap.x0 + 1};
  const int ys[4] = {tap.y0, tap.y0, tap.y0 + 1, tap.y0 + 1};
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0 || xs[k] < 0 || ys[k] < 0 || xs[k] >= image.width() || ys[k] >= image.height()) continue;
    const T* p = image.pixel(ys[k], xs[k]);
    for (int ch = 0; ch < c; ++ch) out[ch] += T(w[k]) * p[ch];
  }
}

template <class T>
Image<T> warp_bilinear(const Image<T>& image, const Homography& homography, int out_h, int out_w) {
  Image<T> out(out_h, out_w, image.channels());
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      Eigen::Vector3d p = homography * Eigen::Vector3d(x, y, 1.0);
      if (p.z() <= 0) continue;  // behind the reference camera
      sample_bilinear(image, p.x() / p.z(), p.y() / p.z(), out.pixel(y, x));
    }
  }
  return out;
}

template void sample_bilinear<float>(const Image<float>&, double, double, float*);
template void sample_bilinear<double>(const Image<double>&, double, double, double*);
template Image<float> warp_bilinear<float>(const Image<float>&, const Homography&, int, int);
template Image<double> warp_bilinear<double>(const Image<double>&, const Homography&, int, int);

}  // namespace mtvloop
