#include "mtvloop/looping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtvloop {

void PatchConfig::validate() const {
  MTV_REQUIRE(spatial >= 1 && spatial % 2 == 1, "patch config: spatial size must be odd and positive");
  MTV_REQUIRE(temporal_size >= 1, "patch config: temporal size must be positive");
  MTV_REQUIRE(temporal_stride >= 1 && temporal_stride <= temporal_size, "patch config: need 1 <= d <= s");
  MTV_REQUIRE(rho >= 0, "patch config: rho must be non-negative");
}

namespace {

void check_video(const Video& v, const char* what) {
  MTV_REQUIRE(!v.empty(), std::string(what) + ": empty video");
  for (const auto& f : v)
    MTV_REQUIRE(f.same_shape(v.front()) && f.channels() == 3, std::string(what) + ": inconsistent frames");
}

}  // namespace

Video circular_pad(const Video& video, const PatchConfig& config) {
  config.validate();
  check_video(video, "circular_pad");
  const int t = int(video.size()), p = config.padding();
  Video out = video;
  for (int q = 0; q < p; ++q) out.push_back(video[q % t]);
  return out;
}

PatchSet extract_temporal_patches(const Video& video, const PatchConfig& config, int row, int col) {
  config.validate();
  check_video(video, "extract_temporal_patches");
  const int f = int(video.size()), s = config.temporal_size, d = config.temporal_stride;
  const int r = config.spatial / 2;
  const int h = video.front().height(), w = video.front().width();
  MTV_REQUIRE(row - r >= 0 && col - r >= 0 && row + r < h && col + r < w,
              "extract_temporal_patches: spatial window does not fit");
  MTV_REQUIRE(f >= s, "extract_temporal_patches: video shorter than the temporal patch");
  PatchSet set;
  for (int start = 0; start + s - 1 <= f - 1; start += d) {
    std::vector<double> p;
    p.reserve(config.patch_dim());
    for (int tau = 0; tau < s; ++tau)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double* px = video[start + tau].pixel(row + dy, col + dx);
          p.insert(p.end(), px, px + 3);
        }
    set.patches.push_back(std::move(p));
    set.offsets.push_back(start);
  }
  return set;
}

ScoreTable nss_table(const PatchSet& queries, const PatchSet& keys, double rho) {
  MTV_REQUIRE(queries.size() > 0 && keys.size() > 0, "nss_table: empty patch set");
  MTV_REQUIRE(rho >= 0, "nss_table: rho must be non-negative");
  const size_t dim = queries.patches.front().size();
  for (const auto& p : queries.patches) MTV_REQUIRE(p.size() == dim, "nss_table: query dimension mismatch");
  for (const auto& p : keys.patches) MTV_REQUIRE(p.size() == dim, "nss_table: key dimension mismatch");
  ScoreTable t;
  t.rows = queries.size();
  t.cols = keys.size();
  t.values.resize(size_t(t.rows) * t.cols);
  for (int i = 0; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) {
      double s = 0;
      for (size_t e = 0; e < dim; ++e) {
        double v = queries.patches[i][e] - keys.patches[j][e];
        s += v * v;
      }
      t.values[size_t(i) * t.cols + j] = s;
    }
  if (std::isinf(rho)) return t;
  for (int j = 0; j < t.cols; ++j) {
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows; ++i) mn = std::min(mn, t(i, j));
    const double denom = std::max(rho + mn, kNssFloor);
    for (int i = 0; i < t.rows; ++i) t.values[size_t(i) * t.cols + j] /= denom;
  }
  return t;
}

std::vector<int> select_pnn(const ScoreTable& table) {
  std::vector<int> f(table.rows, 0);
  for (int i = 0; i < table.rows; ++i) {
    double best = table(i, 0);
    for (int j = 1; j < table.cols; ++j) {
      if (table(i, j) < best) {
        best = table(i, j);
        f[i] = j;
      }
    }
  }
  return f;
}

namespace {

// Sliding k-wide sums along x for rows [y0, y1): out(y, cx) for cx ∈ [r, w−1−r].
void horizontal_box(const std::vector<double>& img, int w, int y0, int y1, int r, std::vector<double>& out, int vw) {
  for (int y = y0; y < y1; ++y) {
    const double* row = img.data() + size_t(y - y0) * w;
    double* o = out.data() + size_t(y - y0) * vw;
    double s = 0;
    for (int x = 0; x < 2 * r + 1; ++x) s += row[x];
    o[0] = s;
    for (int cx = 1; cx < vw; ++cx) {
      s += row[cx + 2 * r] - row[cx - 1];
      o[cx] = s;
    }
  }
}

}  // namespace

LoopingResult looping_loss(const Video& rendered, const Video& input, const PatchConfig& config, bool with_grad) {
  config.validate();
  check_video(rendered, "looping_loss(rendered)");
  check_video(input, "looping_loss(input)");
  const int h = rendered.front().height(), w = rendered.front().width();
  MTV_REQUIRE(input.front().height() == h && input.front().width() == w, "looping_loss: spatial size mismatch");
  const int k = config.spatial, r = k / 2, s = config.temporal_size, d = config.temporal_stride;
  const int t_count = int(rendered.size()), f_count = int(input.size());
  MTV_REQUIRE(h >= k && w >= k, "looping_loss: window smaller than the spatial patch");
  MTV_REQUIRE(t_count >= s && f_count >= s, "looping_loss: video shorter than the temporal patch");

  const int padded = t_count + config.padding();
  const int n = (padded - s) / d + 1;
  const int m = (f_count - s) / d + 1;
  const int vh = h - k + 1, vw = w - k + 1;
  const size_t centers = size_t(vh) * vw;

  LoopingResult res;
  res.valid_centers = int(centers);
  res.query_count = n;
  res.key_count = m;
  res.selection.assign(centers * n, 0);
  if (with_grad)
    for (int t = 0; t < t_count; ++t) res.grad.emplace_back(h, w, 3);

  // Rendered frame index behind each padded position.
  std::vector<int> qframe(padded);
  for (int u = 0; u < padded; ++u) qframe[u] = u % t_count;

  // Process centre rows in bands so the per-pair distance maps stay bounded.
  const size_t budget = size_t(1) << 22;
  const size_t pairs = size_t(t_count) * f_count;
  const int band = int(std::clamp<size_t>(budget / std::max<size_t>(1, pairs * vw), 1, size_t(vh)));

  std::vector<double> dist_maps;   // pair-major: [a·F + b][band centre]
  std::vector<double> weights;     // same layout, selection counts
  std::vector<char> pair_used(pairs);
  std::vector<double> diff, hsum;
  std::vector<double> dist(size_t(n) * m), col_min(m);
  double total = 0;
  const double scale = 1.0 / (double(n) * double(centers));

  for (int cy0 = 0; cy0 < vh; cy0 += band) {
    const int cy1 = std::min(vh, cy0 + band);
    const int bh = cy1 - cy0;
    const int y0 = cy0, y1 = cy1 - 1 + k;  // image rows touched: [y0, y1)
    const int rows = y1 - y0;
    const size_t band_centers = size_t(bh) * vw;
    dist_maps.assign(pairs * band_centers, 0.0);
    diff.assign(size_t(rows) * w, 0.0);
    hsum.assign(size_t(rows) * vw, 0.0);

    for (int a = 0; a < t_count; ++a) {
      for (int b = 0; b < f_count; ++b) {
        const auto& ra = rendered[a].storage();
        const auto& ib = input[b].storage();
        for (int y = y0; y < y1; ++y) {
          const size_t base = size_t(y) * w * 3;
          double* drow = diff.data() + size_t(y - y0) * w;
          for (int x = 0; x < w; ++x) {
            double e0 = ra[base + x * 3] - ib[base + x * 3];
            double e1 = ra[base + x * 3 + 1] - ib[base + x * 3 + 1];
            double e2 = ra[base + x * 3 + 2] - ib[base + x * 3 + 2];
            drow[x] = e0 * e0 + e1 * e1 + e2 * e2;
          }
        }
        horizontal_box(diff, w, y0, y1, r, hsum, vw);
        double* out = dist_maps.data() + (size_t(a) * f_count + b) * band_centers;
        for (int cx = 0; cx < vw; ++cx) {
          double sum = 0;
          for (int y = 0; y < k; ++y) sum += hsum[size_t(y) * vw + cx];
          out[cx] = sum;
          for (int cy = 1; cy < bh; ++cy) {
            sum += hsum[size_t(cy + k - 1) * vw + cx] - hsum[size_t(cy - 1) * vw + cx];
            out[size_t(cy) * vw + cx] = sum;
          }
        }
      }
    }

    if (with_grad) {
      weights.assign(pairs * band_centers, 0.0);
      std::fill(pair_used.begin(), pair_used.end(), 0);
    }
    for (size_t bc = 0; bc < band_centers; ++bc) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          double sum = 0;
          for (int tau = 0; tau < s; ++tau) {
            const int a = qframe[i * d + tau], b = j * d + tau;
            sum += dist_maps[(size_t(a) * f_count + b) * band_centers + bc];
          }
          dist[size_t(i) * m + j] = sum;
        }
      const bool plain = std::isinf(config.rho);
      if (!plain) {
        for (int j = 0; j < m; ++j) {
          double mn = std::numeric_limits<double>::infinity();
          for (int i = 0; i < n; ++i) mn = std::min(mn, dist[size_t(i) * m + j]);
          col_min[j] = std::max(config.rho + mn, kNssFloor);
        }
      }
      const size_t center = size_t(cy0) * vw + bc;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_score = plain ? dist[size_t(i) * m] : dist[size_t(i) * m] / col_min[0];
        for (int j = 1; j < m; ++j) {
          double sc = plain ? dist[size_t(i) * m + j] : dist[size_t(i) * m + j] / col_min[j];
          if (sc < best_score) {
            best_score = sc;
            best = j;
          }
        }
        res.selection[center * n + i] = best;
        total += dist[size_t(i) * m + best];
        if (with_grad) {
          for (int tau = 0; tau < s; ++tau) {
            const size_t pair = size_t(qframe[i * d + tau]) * f_count + size_t(best * d + tau);
            weights[pair * band_centers + bc] += 1.0;
            pair_used[pair] = 1;
          }
        }
      }
    }

    if (!with_grad) continue;
    // ∂/∂R_a(x) = 2·scale·Σ_b (R_a(x) − I_b(x))·Σ_{centres c ∋ x} W_ab(c)
    std::vector<double> vsum(size_t(rows) * vw), box(size_t(rows) * w);
    for (size_t pair = 0; pair < pairs; ++pair) {
      if (!pair_used[pair]) continue;
      const int a = int(pair / f_count), b = int(pair % f_count);
      const double* wmap = weights.data() + pair * band_centers;
      // Vertical spread: vsum(y, cx) = Σ_{cy : cy ≤ y−y0 < cy+k} W(cy, cx).
      std::fill(vsum.begin(), vsum.end(), 0.0);
      for (int cx = 0; cx < vw; ++cx) {
        double run = 0;
        for (int y = 0; y < rows; ++y) {
          if (y < bh) run += wmap[size_t(y) * vw + cx];
          if (y - k >= 0 && y - k < bh) run -= wmap[size_t(y - k) * vw + cx];
          vsum[size_t(y) * vw + cx] = run;
        }
      }
      // Horizontal spread: box(y, x) = Σ_{cx : cx ≤ x < cx+k} vsum(y, cx).
      for (int y = 0; y < rows; ++y) {
        double run = 0;
        const double* vrow = vsum.data() + size_t(y) * vw;
        double* brow = box.data() + size_t(y) * w;
        for (int x = 0; x < w; ++x) {
          if (x < vw) run += vrow[x];
          if (x - k >= 0 && x - k < vw) run -= vrow[x - k];
          brow[x] = run;
        }
      }
      auto& g = res.grad[a].storage();
      const auto& ra = rendered[a].storage();
      const auto& ib = input[b].storage();
      for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < w; ++x) {
          const double cnt = box[size_t(y) * w + x];
          if (cnt == 0) continue;
          const size_t base = (size_t(y + y0) * w + x) * 3;
          for (int ch = 0; ch < 3; ++ch) g[base + ch] += 2.0 * scale * cnt * (ra[base + ch] - ib[base + ch]);
        }
      }
    }
  }
  res.loss = total * scale;
  return res;
}

}  // namespace mtvloop
