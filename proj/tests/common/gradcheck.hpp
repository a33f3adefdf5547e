#pragma once

// Finite-difference oracles for the analytic gradients of the stage-1 objective,
// the renderer and the looping loss.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "mtvloop/looping.hpp"
#include "mtvloop/renderer.hpp"
#include "mtvloop/stage1.hpp"

namespace gradcheck {

using namespace mtvloop;

inline constexpr double kStep = 1e-4;
inline constexpr double kStencilStep = 1e-3;
inline constexpr double kFloor = 1e-7;

struct Result {
  double max_rel = 0;
  size_t count = 0;
};

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
}

// Fourth-order central difference of f with respect to p, restoring p afterwards.
inline double stencil_derivative(double& p, const std::function<double()>& f) {
  const double orig = p, h = kStencilStep;
  double v[4];
  const double offsets[4] = {h, -h, 2 * h, -2 * h};
  for (int i = 0; i < 4; ++i) {
    p = orig + offsets[i];
    v[i] = f();
  }
  p = orig;
  return (8 * (v[0] - v[1]) - (v[2] - v[3])) / (12 * h);
}

// Values on a 1/257 lattice in [1/257, 256/257]: TV differences are either exactly zero
// or larger than the reach of the finite-difference stencil, so no kink is crossed.
inline double lattice(std::mt19937_64& rng) { return double(1 + rng() % 256) / 257.0; }

inline CameraModel camera(int w, int h, double f, double tx, double ty, double tz, double yaw, double pitch) {
  CameraModel c;
  c.width = w;
  c.height = h;
  c.fx = c.fy = f;
  c.cx = (w - 1) / 2.0;
  c.cy = (h - 1) / 2.0;
  c.rotation = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  c.translation = -c.rotation * Eigen::Vector3d(tx, ty, tz);
  return c;
}

struct Instance {
  Mpi mpi;
  LoopableVolume loopable;
  ViewRecord view;
  RenderWindow window;
};

// Random D-plane size×size MPI observed by a slightly offset, rotated camera.
inline Instance random_instance(uint64_t seed, int depth = 4, int size = 16) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.mpi.stack.reference = camera(size, size, size, 0, 0, 0, 0, 0);
  in.mpi.stack.depths = disparity_depths(1.5, 6.0, depth);
  for (int d = 0; d < depth; ++d) {
    Image<double> p(size, size, 4);
    for (double& v : p.storage()) v = lattice(rng);
    in.mpi.planes.push_back(std::move(p));
    Image<double> l(size, size, 1);
    for (double& v : l.storage()) v = lattice(rng);
    in.loopable.values.push_back(std::move(l));
  }
  std::uniform_real_distribution<double> u(-1, 1);
  in.view.camera = camera(size, size, size, 0.08 * u(rng), 0.08 * u(rng), 0.05 * u(rng), 0.03 * u(rng), 0.03 * u(rng));
  in.view.average_image = Image<double>(size, size, 3);
  for (double& v : in.view.average_image.storage()) v = lattice(rng);
  in.view.loopable_mask2d = Image<double>(size, size, 1);
  for (double& v : in.view.loopable_mask2d.storage()) v = double(rng() % 2);
  in.window = RenderWindow::full(in.view.camera);
  return in;
}

// Every MPI RGBA and loopable parameter of the stage-1 total objective.
inline Result check_stage1(uint64_t seed) {
  Instance in = random_instance(seed);
  Stage1Config cfg;
  MpiGrad<double> grad = MpiGrad<double>::zeros_like(in.mpi);
  stage1_objective(in.mpi, in.loopable, in.view, in.window, cfg, &grad);
  auto f = [&] { return stage1_objective(in.mpi, in.loopable, in.view, in.window, cfg, nullptr); };
  Result r;
  auto probe = [&](double& p, double analytic) {
    r.max_rel = std::max(r.max_rel, rel_err(analytic, stencil_derivative(p, f)));
    ++r.count;
  };
  for (int d = 0; d < in.mpi.depth_count(); ++d) {
    for (size_t i = 0; i < in.mpi.planes[d].size(); ++i) probe(in.mpi.planes[d].storage()[i], grad.planes[d].storage()[i]);
    for (size_t i = 0; i < in.loopable.values[d].size(); ++i)
      probe(in.loopable.values[d].storage()[i], grad.loopable[d].storage()[i]);
  }
  return r;
}

// Renderer alone under a random linear functional of RGB and mask. With `single`, the
// analytic gradient is evaluated at 32-bit precision against the 64-bit numeric one.
inline Result check_render(uint64_t seed, bool single, int depth = 3, int size = 8) {
  Instance in = random_instance(seed, depth, size);
  std::mt19937_64 rng(seed + 99);
  std::uniform_real_distribution<double> u(-1, 1);
  Image<double> wr(size, size, 3), wm(size, size, 1);
  for (double& v : wr.storage()) v = u(rng);
  for (double& v : wm.storage()) v = u(rng);
  auto f = [&] {
    auto r = render_mpi<double>(in.mpi, &in.loopable, in.window);
    double s = 0;
    for (size_t i = 0; i < wr.size(); ++i) s += wr.storage()[i] * r.rgb.storage()[i];
    for (size_t i = 0; i < wm.size(); ++i) s += wm.storage()[i] * r.loop_mask.storage()[i];
    return s;
  };
  std::vector<Image<double>> gp, gl;
  if (single) {
    BasicMpi<float> m = in.mpi.cast<float>();
    BasicLoopableVolume<float> l = in.loopable.cast<float>();
    RenderRecord<float> rec;
    render_mpi<float>(m, &l, in.window, &rec);
    auto g = MpiGrad<float>::zeros_like(m);
    Image<float> wrf = wr.cast<float>(), wmf = wm.cast<float>();
    render_backward<float>(rec, wrf, &wmf, g);
    for (auto& p : g.planes) gp.push_back(p.cast<double>());
    for (auto& p : g.loopable) gl.push_back(p.cast<double>());
  } else {
    RenderRecord<double> rec;
    render_mpi<double>(in.mpi, &in.loopable, in.window, &rec);
    auto g = MpiGrad<double>::zeros_like(in.mpi);
    render_backward<double>(rec, wr, &wm, g);
    gp = g.planes;
    gl = g.loopable;
  }
  Result r;
  auto probe = [&](double& p, double analytic) {
    r.max_rel = std::max(r.max_rel, rel_err(analytic, stencil_derivative(p, f)));
    ++r.count;
  };
  for (int d = 0; d < depth; ++d) {
    for (size_t i = 0; i < gp[d].size(); ++i) probe(in.mpi.planes[d].storage()[i], gp[d].storage()[i]);
    for (size_t i = 0; i < gl[d].size(); ++i) probe(in.loopable.values[d].storage()[i], gl[d].storage()[i]);
  }
  return r;
}

// Looping loss with the patch selection of the unperturbed input held fixed, evaluated by
// explicit patch enumeration. Accumulates in extended precision to keep the
// finite-difference quotient above rounding noise.
inline long double frozen_looping_loss(const Video& rendered, const Video& input, const PatchConfig& cfg,
                                  const std::vector<int>& selection) {
  const int h = rendered.front().height(), w = rendered.front().width(), r = cfg.spatial / 2;
  const Video padded = circular_pad(rendered, cfg);
  long double total = 0;
  int centres = 0, n = 0;
  for (int y = r; y < h - r; ++y)
    for (int x = r; x < w - r; ++x, ++centres) {
      const PatchSet q = extract_temporal_patches(padded, cfg, y, x);
      const PatchSet k = extract_temporal_patches(input, cfg, y, x);
      n = q.size();
      for (int i = 0; i < q.size(); ++i) {
        const auto& a = q.patches[i];
        const auto& b = k.patches[selection[size_t(centres) * n + i]];
        for (size_t e = 0; e < a.size(); ++e) {
          const long double diff = (long double)a[e] - b[e];
          total += diff * diff;
        }
      }
    }
  return total / ((long double)n * centres);
}

inline Result check_looping(uint64_t seed, int h, int w, int k, int frames, int input_frames, int s, int d,
                            bool padding = true) {
  std::mt19937_64 rng(seed);
  auto video = [&](int count) {
    Video v;
    for (int t = 0; t < count; ++t) {
      Image<double> f(h, w, 3);
      for (double& x : f.storage()) x = lattice(rng);
      v.push_back(std::move(f));
    }
    return v;
  };
  Video rendered = video(frames), input = video(input_frames);
  PatchConfig cfg{k, s, d, 0.0, padding};
  LoopingResult lr = looping_loss(rendered, input, cfg, true);
  Result r;
  for (int t = 0; t < frames; ++t)
    for (size_t i = 0; i < rendered[t].size(); ++i) {
      double& p = rendered[t].storage()[i];
      const double orig = p;
      const double plus = orig + kStep, minus = orig - kStep;
      p = plus;
      const long double fp = frozen_looping_loss(rendered, input, cfg, lr.selection);
      p = minus;
      const long double fm = frozen_looping_loss(rendered, input, cfg, lr.selection);
      p = orig;
      const double numeric = double((fp - fm) / ((long double)plus - minus));
      r.max_rel = std::max(r.max_rel, rel_err(lr.grad[t].storage()[i], numeric));
      ++r.count;
    }
  return r;
}

}  // namespace gradcheck
