#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "mtvloop/camera.hpp"
#include "mtvloop/geometry.hpp"
#include "mtvloop/mpi.hpp"
#include "mtvloop/mtv.hpp"
#include "mtvloop/scene_io.hpp"

namespace testutil {

using namespace mtvloop;

inline CameraModel make_camera(int w, int h, double f, double tx = 0, double ty = 0, double tz = 0,
                               double yaw = 0, double pitch = 0) {
  CameraModel c;
  c.width = w;
  c.height = h;
  c.fx = c.fy = f;
  c.cx = (w - 1) / 2.0;
  c.cy = (h - 1) / 2.0;
  c.rotation = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  // Camera centre at (tx, ty, tz) in world coordinates.
  c.translation = -c.rotation * Eigen::Vector3d(tx, ty, tz);
  return c;
}

// A camera near `ref` with a small random offset and rotation.
inline CameraModel jitter_camera(const CameraModel& ref, std::mt19937_64& rng, double shift = 0.1, double angle = 0.03) {
  std::uniform_real_distribution<double> u(-1, 1);
  CameraModel c = make_camera(ref.width, ref.height, ref.fx, shift * u(rng), shift * u(rng), 0.5 * shift * u(rng),
                              angle * u(rng), angle * u(rng));
  c.cx = ref.cx;
  c.cy = ref.cy;
  return c;
}

inline Mpi random_mpi(const CameraModel& ref, int depth, std::mt19937_64& rng, double near = 1.5, double far = 6.0) {
  Mpi m;
  m.stack.reference = ref;
  m.stack.depths = disparity_depths(near, far, depth);
  std::uniform_real_distribution<double> u(0, 1);
  for (int d = 0; d < depth; ++d) {
    Image<double> p(ref.height, ref.width, 4);
    for (double& v : p.storage()) v = u(rng);
    m.planes.push_back(std::move(p));
  }
  return m;
}

inline LoopableVolume random_loopable(const Mpi& mpi, std::mt19937_64& rng) {
  LoopableVolume l;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int d = 0; d < mpi.depth_count(); ++d) {
    Image<double> p(mpi.height(), mpi.width(), 1);
    for (double& v : p.storage()) v = u(rng);
    l.values.push_back(std::move(p));
  }
  return l;
}

inline Video random_video(int frames, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Video v;
  for (int t = 0; t < frames; ++t) {
    Image<double> f(h, w, 3);
    for (double& x : f.storage()) x = u(rng);
    v.push_back(std::move(f));
  }
  return v;
}

inline double max_abs_diff(const Image<double>& a, const Image<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.storage()[i] - b.storage()[i]));
  return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mtvloop_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Four 64×48 face-forward views of a static background with, unless `static_only`, an
// animated period-6 rectangle in front. Both planes sit exactly on a 4-plane stack over
// [1.25, 5].
inline SceneSpec small_scene_spec(bool static_only = false, int frames = 24) {
  SceneSpec spec;
  spec.reference = make_camera(64, 48, 60);
  const double centres[4][2] = {{-0.05, -0.04}, {0.05, -0.04}, {-0.05, 0.04}, {0.02, 0.01}};
  const int starts[4] = {0, 4, 2, 5};
  for (int v = 0; v < 4; ++v) {
    spec.cameras.push_back(make_camera(64, 48, 60, centres[v][0], centres[v][1]));
    spec.start_frames.push_back(starts[v]);
  }
  spec.frame_count = frames;
  spec.near = 1.25;
  spec.far = 5.0;
  spec.mpi_planes = 4;
  SyntheticPlane back;
  back.depth = 5.0;
  back.x0 = back.y0 = -1000;
  back.x1 = back.y1 = 1000;
  back.wavelength = 14;
  back.seed = 11;
  spec.planes.push_back(back);
  if (!static_only) {
    SyntheticPlane water;
    water.depth = 2.5;
    water.x0 = 30;
    water.y0 = 10;
    water.x1 = 58;
    water.y1 = 38;
    water.period = 6;
    water.amplitude = 0.3;
    water.wavelength = 10;
    water.seed = 12;
    spec.planes.push_back(water);
  }
  return spec;
}

inline double psnr(const Image<double>& a, const Image<double>& b) {
  double se = 0;
  for (size_t i = 0; i < a.size(); ++i) se += (a.storage()[i] - b.storage()[i]) * (a.storage()[i] - b.storage()[i]);
  const double mse = se / double(a.size());
  return mse == 0 ? 1e9 : 10 * std::log10(1.0 / mse);
}

}  // namespace testutil
