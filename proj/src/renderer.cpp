#include "mtvloop/renderer.hpp"

#include "mtvloop/mtv.hpp"

namespace mtvloop {

template <class T>
Image<T> composite_over(const std::vector<Image<T>>& planes) {
  MTV_REQUIRE(!planes.empty(), "composite_over: empty plane list");
  const auto& first = planes.front();
  MTV_REQUIRE(first.channels() >= 2, "composite_over: planes need color and alpha channels");
  const int c = first.channels() - 1;
  Image<T> out(first.height(), first.width(), c);
  for (const auto& plane : planes) {
    MTV_REQUIRE(plane.same_shape(first), "composite_over: plane shape mismatch");
    for (size_t i = 0; i < out.pixel_count(); ++i) {
      const T* p = plane.storage().data() + i * (c + 1);
      T* o = out.storage().data() + i * c;
      const T a = p[c];
      for (int ch = 0; ch < c; ++ch) o[ch] = p[ch] * a + o[ch] * (T(1) - a);
    }
  }
  return out;
}

template <class T>
MpiGrad<T> MpiGrad<T>::zeros_like(const BasicMpi<T>& mpi) {
  MpiGrad g;
  for (int d = 0; d < mpi.depth_count(); ++d) {
    g.planes.emplace_back(mpi.height(), mpi.width(), 4);
    g.loopable.emplace_back(mpi.height(), mpi.width(), 1);
  }
  return g;
}

template <class T>
void MpiGrad<T>::zero() {
  for (auto& p : planes) p.fill(T(0));
  for (auto& p : loopable) p.fill(T(0));
}

namespace {

// Weights and texel coordinates of the four bilinear neighbours.
struct Footprint {
  double w[4];
  int x[4], y[4];
  explicit Footprint(const BilinearTap& t)
      : w{(1 - t.wx) * (1 - t.wy), t.wx * (1 - t.wy), (1 - t.wx) * t.wy, t.wx * t.wy},
        x{t.x0, t.x0 + 1, t.x0, t.x0 + 1},
        y{t.y0, t.y0, t.y0 + 1, t.y0 + 1} {}
  bool inside(int k, int h, int wd) const { return w[k] != 0 && x[k] >= 0 && y[k] >= 0 && x[k] < wd && y[k] < h; }
};

}  // namespace

template <class T>
RenderResult<T> render_mpi(const BasicMpi<T>& mpi, const BasicLoopableVolume<T>* loopable,
                           const RenderWindow& window, RenderRecord<T>* record) {
  mpi.validate();
  window.validate();
  const int depth = mpi.depth_count(), ph = mpi.height(), pw = mpi.width();
  const int h = window.height, w = window.width;
  const bool with_l = loopable != nullptr;
  if (with_l) {
    MTV_REQUIRE(int(loopable->values.size()) == depth, "render_mpi: loopable volume depth mismatch");
    for (const auto& v : loopable->values)
      MTV_REQUIRE(v.height() == ph && v.width() == pw && v.channels() == 1, "render_mpi: loopable shape mismatch");
  }

  RenderResult<T> result;
  result.rgb = Image<T>(h, w, 3);
  if (with_l) result.loop_mask = Image<T>(h, w, 1);

  const size_t n = size_t(h) * w;
  if (record) {
    record->depth_count = depth;
    record->height = h;
    record->width = w;
    record->plane_height = ph;
    record->plane_width = pw;
    record->with_loopable = with_l;
    record->taps.assign(depth * n, BilinearTap{});
    record->samples.assign(depth * n * 4, T(0));
    record->loop_samples.assign(with_l ? depth * n : 0, T(0));
    record->before.assign(depth * n * 4, T(0));
  }

  std::vector<T> acc(n * 4, T(0));  // RGB + mask
  for (int d = depth - 1; d >= 0; --d) {
    const Homography hom = plane_homography(mpi.stack.reference, window.view, mpi.stack.depths[d]);
    const Image<T>& plane = mpi.planes[d];
    const Image<T>* lplane = with_l ? &loopable->values[d] : nullptr;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = size_t(y) * w + x;
        T* a = acc.data() + i * 4;
        if (record) std::copy_n(a, 4, record->before.data() + (d * n + i) * 4);

        Eigen::Vector3d p = hom * Eigen::Vector3d(window.col + x, window.row + y, 1.0);
        if (p.z() <= 0) continue;
        BilinearTap tap = BilinearTap::at(p.x() / p.z(), p.y() / p.z(), ph, pw);
        if (!tap.valid) continue;
        Footprint fp(tap);
        T s[4] = {0, 0, 0, 0};
        T sl = 0;
        for (int k = 0; k < 4; ++k) {
          if (!fp.inside(k, ph, pw)) continue;
          const T wk = T(fp.w[k]);
          const T* texel = plane.pixel(fp.y[k], fp.x[k]);
          for (int ch = 0; ch < 4; ++ch) s[ch] += wk * texel[ch];
          if (lplane) sl += wk * (*lplane)(fp.y[k], fp.x[k]);
        }
        const T alpha = s[3];
        for (int ch = 0; ch < 3; ++ch) a[ch] = s[ch] * alpha + a[ch] * (T(1) - alpha);
        if (with_l) a[3] = sl * alpha + a[3] * (T(1) - alpha);
        if (record) {
          record->taps[d * n + i] = tap;
          std::copy_n(s, 4, record->samples.data() + (d * n + i) * 4);
          if (with_l) record->loop_samples[d * n + i] = sl;
        }
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) result.rgb.storage()[i * 3 + ch] = acc[i * 4 + ch];
    if (with_l) result.loop_mask.storage()[i] = acc[i * 4 + 3];
  }
  return result;
}

template <class T>
void render_backward(const RenderRecord<T>& record, const Image<T>& d_rgb, const Image<T>* d_mask,
                     MpiGrad<T>& grad) {
  const int depth = record.depth_count, h = record.height, w = record.width;
  const int ph = record.plane_height, pw = record.plane_width;
  MTV_REQUIRE(d_rgb.height() == h && d_rgb.width() == w && d_rgb.channels() == 3,
              "render_backward: upstream gradient shape mismatch");
  if (d_mask) {
    MTV_REQUIRE(record.with_loopable, "render_backward: mask gradient given but no loopable volume rendered");
    MTV_REQUIRE(d_mask->height() == h && d_mask->width() == w && d_mask->channels() == 1,
                "render_backward: mask gradient shape mismatch");
  }
  MTV_REQUIRE(int(grad.planes.size()) == depth, "render_backward: gradient buffer depth mismatch");
  for (const auto& g : grad.planes)
    MTV_REQUIRE(g.height() == ph && g.width() == pw && g.channels() == 4, "render_backward: gradient buffer shape");
  if (d_mask) MTV_REQUIRE(int(grad.loopable.size()) == depth, "render_backward: loopable gradient buffer depth");

  const size_t n = size_t(h) * w;
  for (size_t i = 0; i < n; ++i) {
    T g[4] = {d_rgb.storage()[i * 3], d_rgb.storage()[i * 3 + 1], d_rgb.storage()[i * 3 + 2],
              d_mask ? d_mask->storage()[i] : T(0)};
    // Planes were blended far→near, so the reverse sweep runs near→far.
    for (int d = 0; d < depth; ++d) {
      const size_t k = d * n + i;
      const BilinearTap& tap = record.taps[k];
      if (!tap.valid) continue;
      const T* s = record.samples.data() + k * 4;
      const T* prev = record.before.data() + k * 4;
      const T alpha = s[3];
      T dc[3];
      T da = 0;
      for (int ch = 0; ch < 3; ++ch) {
        dc[ch] = g[ch] * alpha;
        da += g[ch] * (s[ch] - prev[ch]);
      }
      T dl = 0;
      if (d_mask) {
        const T l = record.loop_samples[k];
        dl = g[3] * alpha;
        da += g[3] * (l - prev[3]);
      }
      Footprint fp(tap);
      Image<T>& gp = grad.planes[d];
      for (int q = 0; q < 4; ++q) {
        if (!fp.inside(q, ph, pw)) continue;
        const T wq = T(fp.w[q]);
        T* texel = gp.pixel(fp.y[q], fp.x[q]);
        for (int ch = 0; ch < 3; ++ch) texel[ch] += wq * dc[ch];
        texel[3] += wq * da;
        if (d_mask) grad.loopable[d](fp.y[q], fp.x[q]) += wq * dl;
      }
      for (int ch = 0; ch < 4; ++ch) g[ch] *= (T(1) - alpha);
    }
  }
}

Image<double> render_mtv(const Mtv& mtv, int t, const RenderWindow& window) {
  Mpi dense = densify(mtv, t);
  return render_mpi<double>(dense, nullptr, window).rgb;
}

template Image<float> composite_over<float>(const std::vector<Image<float>>&);
template Image<double> composite_over<double>(const std::vector<Image<double>>&);
template struct MpiGrad<float>;
template struct MpiGrad<double>;
template RenderResult<float> render_mpi<float>(const BasicMpi<float>&, const BasicLoopableVolume<float>*,
                                               const RenderWindow&, RenderRecord<float>*);
template RenderResult<double> render_mpi<double>(const BasicMpi<double>&, const BasicLoopableVolume<double>*,
                                                 const RenderWindow&, RenderRecord<double>*);
template void render_backward<float>(const RenderRecord<float>&, const Image<float>&, const Image<float>*,
                                     MpiGrad<float>&);
template void render_backward<double>(const RenderRecord<double>&, const Image<double>&, const Image<double>*,
                                      MpiGrad<double>&);

}  // namespace mtvloop
