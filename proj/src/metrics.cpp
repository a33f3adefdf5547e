#include "mtvloop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mtvloop {

namespace {

void check_pair(const Video& a, const Video& b, const char* what) {
  MTV_REQUIRE(!a.empty() && !b.empty(), std::string(what) + ": empty video");
  for (const auto& f : a) MTV_REQUIRE(f.same_shape(a.front()) && f.channels() == 3, std::string(what) + ": bad frames");
  for (const auto& f : b) MTV_REQUIRE(f.same_shape(a.front()), std::string(what) + ": spatial dims differ");
}

Image<double> std_map(const Video& v) {
  const size_t n = v.front().size();
  std::vector<double> mean(n, 0.0), sq(n, 0.0);
  for (const auto& f : v)
    for (size_t i = 0; i < n; ++i) mean[i] += f.storage()[i];
  for (auto& m : mean) m /= double(v.size());
  for (const auto& f : v)
    for (size_t i = 0; i < n; ++i) {
      double d = f.storage()[i] - mean[i];
      sq[i] += d * d;
    }
  Image<double> out(v.front().height(), v.front().width(), 3);
  for (size_t i = 0; i < n; ++i) out.storage()[i] = 255.0 * std::sqrt(sq[i] / double(v.size()));
  return out;
}

// Source patch temporal layouts: each entry lists the s source frames of one patch.
using FrameTuples = std::vector<std::vector<int>>;

FrameTuples plain_tuples(int frames, const PatchConfig& c) {
  FrameTuples out;
  for (int a = 0; a + c.temporal_size - 1 <= frames - 1; a += c.temporal_stride) {
    std::vector<int> t;
    for (int tau = 0; tau < c.temporal_size; ++tau) t.push_back(a + tau);
    out.push_back(std::move(t));
  }
  return out;
}

FrameTuples wrap_tuples(int frames, const PatchConfig& c) {
  const int s = c.temporal_size;
  FrameTuples out;
  for (int a = 0; a < frames; a += c.temporal_stride) {
    if (!(a + s - 1 >= frames || (a == 0 && s >= frames))) continue;
    std::vector<int> t;
    for (int tau = 0; tau < s; ++tau) t.push_back((a + tau) % frames);
    out.push_back(std::move(t));
  }
  return out;
}

// Per config: mean over (tuple, source centre) of the minimum patch MSE over all
// destination starts and centres in the search window, ×100.
std::vector<double> search_direction(const Video& src, const Video& dst, const std::vector<PatchConfig>& configs,
                                     const std::vector<FrameTuples>& tuples, const SearchSpec& search) {
  const int h = src.front().height(), w = src.front().width();
  const int ts = int(src.size()), fd = int(dst.size());
  MTV_REQUIRE(search.spatial_stride >= 1, "metrics: spatial stride must be positive");
  const int radius = search.spatial_radius < 0 ? std::max(h, w) : search.spatial_radius;

  struct Plan {
    int k = 0, r = 0, s = 0;
    std::vector<int> cy, cx;   // source centres
    std::vector<double> best;  // tuple-major × centres
    std::vector<double> e;     // frame-pair-major × centres
  };
  std::vector<Plan> plans;
  for (size_t ci = 0; ci < configs.size(); ++ci) {
    const PatchConfig& c = configs[ci];
    c.validate();
    MTV_REQUIRE(h >= c.spatial && w >= c.spatial, "metrics: frame smaller than the spatial patch");
    MTV_REQUIRE(fd >= c.temporal_size, "metrics: destination video shorter than the temporal patch");
    MTV_REQUIRE(!tuples[ci].empty(), "metrics: source video shorter than the temporal patch");
    Plan p;
    p.k = c.spatial;
    p.r = c.spatial / 2;
    p.s = c.temporal_size;
    for (int y = p.r; y <= h - 1 - p.r; y += search.spatial_stride)
      for (int x = p.r; x <= w - 1 - p.r; x += search.spatial_stride) {
        p.cy.push_back(y);
        p.cx.push_back(x);
      }
    p.best.assign(tuples[ci].size() * p.cy.size(), std::numeric_limits<double>::infinity());
    p.e.assign(size_t(ts) * fd * p.cy.size(), 0.0);
    plans.push_back(std::move(p));
  }

  std::vector<double> integral(size_t(h + 1) * (w + 1));
  std::vector<char> valid;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      // Squared differences src(y, x) − dst(y+dy, x+dx); pixels with no partner contribute
      // only to centres that are rejected below.
      for (int a = 0; a < ts; ++a) {
        for (int b = 0; b < fd; ++b) {
          const auto& sa = src[a];
          const auto& db = dst[b];
          std::fill(integral.begin(), integral.begin() + w + 1, 0.0);
          for (int y = 0; y < h; ++y) {
            double run = 0;
            double* row = integral.data() + size_t(y + 1) * (w + 1);
            const double* prev = row - (w + 1);
            row[0] = 0;
            const int yy = y + dy;
            for (int x = 0; x < w; ++x) {
              const int xx = x + dx;
              if (yy >= 0 && yy < h && xx >= 0 && xx < w) {
                const double* p = sa.pixel(y, x);
                const double* q = db.pixel(yy, xx);
                const double e0 = p[0] - q[0], e1 = p[1] - q[1], e2 = p[2] - q[2];
                run += e0 * e0 + e1 * e1 + e2 * e2;
              }
              row[x + 1] = prev[x + 1] + run;
            }
          }
          for (Plan& p : plans) {
            double* e = p.e.data() + (size_t(a) * fd + b) * p.cy.size();
            for (size_t c = 0; c < p.cy.size(); ++c) {
              const int y0 = p.cy[c] - p.r, x0 = p.cx[c] - p.r, y1 = y0 + p.k, x1 = x0 + p.k;
              const size_t W = w + 1;
              e[c] = integral[y1 * W + x1] - integral[y0 * W + x1] - integral[y1 * W + x0] + integral[y0 * W + x0];
            }
          }
        }
      }
      for (size_t pi = 0; pi < plans.size(); ++pi) {
        Plan& p = plans[pi];
        const size_t nc = p.cy.size();
        valid.assign(nc, 0);
        for (size_t c = 0; c < nc; ++c) {
          const int yy = p.cy[c] + dy, xx = p.cx[c] + dx;
          valid[c] = yy >= p.r && yy <= h - 1 - p.r && xx >= p.r && xx <= w - 1 - p.r;
        }
        const double norm = 1.0 / (double(p.k) * p.k * p.s * 3);
        const FrameTuples& tl = tuples[pi];
        for (size_t ti = 0; ti < tl.size(); ++ti) {
          double* best = p.best.data() + ti * nc;
          for (int b = 0; b + p.s - 1 <= fd - 1; ++b) {
            for (size_t c = 0; c < nc; ++c) {
              if (!valid[c]) continue;
              double sum = 0;
              for (int tau = 0; tau < p.s; ++tau) sum += p.e[(size_t(tl[ti][tau]) * fd + b + tau) * nc + c];
              best[c] = std::min(best[c], std::max(0.0, sum) * norm);
            }
          }
        }
      }
    }
  }

  std::vector<double> out;
  for (const Plan& p : plans) {
    double sum = 0;
    for (double v : p.best) sum += v;
    out.push_back(100.0 * sum / double(p.best.size()));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

std::vector<FrameTuples> tuples_for(const std::vector<PatchConfig>& configs, int frames, bool wrap) {
  std::vector<FrameTuples> out;
  for (const auto& c : configs) {
    c.validate();
    out.push_back(wrap ? wrap_tuples(frames, c) : plain_tuples(frames, c));
  }
  return out;
}

}  // namespace

double stderr_metric(const Video& synthetic, const Video& target) {
  check_pair(synthetic, target, "stderr_metric");
  const Image<double> a = std_map(synthetic), b = std_map(target);
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a.storage()[i] - b.storage()[i];
    sum += d * d;
  }
  return sum / double(a.size());
}

double bds_direction(const Video& src, const Video& dst, const std::vector<PatchConfig>& configs,
                     const SearchSpec& search) {
  check_pair(src, dst, "bds_direction");
  MTV_REQUIRE(!configs.empty(), "bds_direction: no patch configs");
  return mean(search_direction(src, dst, configs, tuples_for(configs, int(src.size()), false), search));
}

double loopq(const Video& synthetic, const Video& target, const std::vector<PatchConfig>& configs,
             const SearchSpec& search) {
  check_pair(synthetic, target, "loopq");
  MTV_REQUIRE(!configs.empty(), "loopq: no patch configs");
  for (const auto& c : configs)
    MTV_REQUIRE(int(synthetic.size()) >= c.temporal_size, "loopq: loop shorter than the temporal patch");
  return mean(search_direction(synthetic, target, configs, tuples_for(configs, int(synthetic.size()), true), search));
}

MetricReport evaluate(const Video& synthetic, const Video& target, const MetricsConfig& config) {
  check_pair(synthetic, target, "evaluate");
  MTV_REQUIRE(!config.patches.empty(), "evaluate: no patch configs");
  const int t = int(synthetic.size());
  for (const auto& c : config.patches)
    MTV_REQUIRE(t >= c.temporal_size, "evaluate: loop shorter than the temporal patch");
  MetricReport r;
  r.stderr_value = stderr_metric(synthetic, target);

  // Coherence and LoopQ share the synthetic frames, so they are searched in one pass.
  std::vector<PatchConfig> both = config.patches;
  both.insert(both.end(), config.patches.begin(), config.patches.end());
  std::vector<FrameTuples> tuples = tuples_for(config.patches, t, false);
  for (auto& w : tuples_for(config.patches, t, true)) tuples.push_back(std::move(w));
  const std::vector<double> forward = search_direction(synthetic, target, both, tuples, config.search);
  const std::vector<double> backward = search_direction(target, synthetic, config.patches,
                                                        tuples_for(config.patches, int(target.size()), false),
                                                        config.search);
  const size_t n = config.patches.size();
  std::vector<double> coh(forward.begin(), forward.begin() + n), lq(forward.begin() + n, forward.end());
  r.coherence = mean(coh);
  r.loopq = mean(lq);
  r.completeness = mean(backward);
  for (size_t i = 0; i < n; ++i) {
    r.breakdown.push_back({"completeness", config.patches[i], backward[i]});
    r.breakdown.push_back({"coherence", config.patches[i], coh[i]});
    r.breakdown.push_back({"loopq", config.patches[i], lq[i]});
  }
  return r;
}

nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["stderr"] = report.stderr_value;
  j["completeness"] = report.completeness;
  j["coherence"] = report.coherence;
  j["loopq"] = report.loopq;
  j["breakdown"] = nlohmann::json::array();
  for (const auto& b : report.breakdown)
    j["breakdown"].push_back({{"metric", b.metric},
                              {"spatial", b.patch.spatial},
                              {"temporal_size", b.patch.temporal_size},
                              {"temporal_stride", b.patch.temporal_stride},
                              {"value", b.value}});
  return j;
}

std::string report_table(const MetricReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "metric        value\n";
  os << "STDerr        " << report.stderr_value << '\n';
  os << "Completeness  " << report.completeness << '\n';
  os << "Coherence     " << report.coherence << '\n';
  os << "LoopQ         " << report.loopq << '\n';
  for (const auto& b : report.breakdown)
    os << "  " << b.metric << " k=" << b.patch.spatial << " s=" << b.patch.temporal_size
       << " d=" << b.patch.temporal_stride << "  " << b.value << '\n';
  return os.str();
}

}  // namespace mtvloop
