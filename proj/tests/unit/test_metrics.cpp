#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "mtvloop/metrics.hpp"

using namespace mtvloop;

namespace {

using Tuples = std::vector<std::vector<int>>;

Tuples plain(int frames, const PatchConfig& c) {
  Tuples out;
  for (int a = 0; a + c.temporal_size <= frames; a += c.temporal_stride) {
    std::vector<int> t;
    for (int i = 0; i < c.temporal_size; ++i) t.push_back(a + i);
    out.push_back(t);
  }
  return out;
}

// Circular windows whose frames include both the last and the first frame.
Tuples seam(int frames, const PatchConfig& c) {
  Tuples out;
  for (int a = 0; a < frames; a += c.temporal_stride) {
    std::vector<int> t;
    bool first = false, last = false;
    for (int i = 0; i < c.temporal_size; ++i) {
      t.push_back((a + i) % frames);
      first |= t.back() == 0;
      last |= t.back() == frames - 1;
    }
    if (first && last) out.push_back(t);
  }
  return out;
}

// Straightforward nested-loop patch search.
double oracle(const Video& src, const Video& dst, const std::vector<PatchConfig>& configs, const SearchSpec& search,
              bool wrap) {
  const int h = src[0].height(), w = src[0].width();
  double total = 0;
  for (const PatchConfig& c : configs) {
    const int r = c.spatial / 2, s = c.temporal_size;
    const int radius = search.spatial_radius < 0 ? std::max(h, w) : search.spatial_radius;
    const Tuples tuples = wrap ? seam(int(src.size()), c) : plain(int(src.size()), c);
    double sum = 0;
    int count = 0;
    for (const auto& tup : tuples)
      for (int y = r; y + r < h; y += search.spatial_stride)
        for (int x = r; x + r < w; x += search.spatial_stride) {
          double best = std::numeric_limits<double>::infinity();
          for (int b = 0; b + s <= int(dst.size()); ++b)
            for (int yy = std::max(r, y - radius); yy <= std::min(h - 1 - r, y + radius); ++yy)
              for (int xx = std::max(r, x - radius); xx <= std::min(w - 1 - r, x + radius); ++xx) {
                double e = 0;
                for (int tau = 0; tau < s; ++tau)
                  for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx)
                      for (int ch = 0; ch < 3; ++ch) {
                        const double d = src[tup[tau]](y + dy, x + dx, ch) - dst[b + tau](yy + dy, xx + dx, ch);
                        e += d * d;
                      }
                best = std::min(best, e / (c.spatial * c.spatial * s * 3));
              }
          sum += best;
          ++count;
        }
    total += 100.0 * sum / count;
  }
  return total / double(configs.size());
}

// A pattern translating to the right by `speed` pixels per frame.
Video drifting(int frames, int h, int w, double speed, int t0 = 0) {
  Video v;
  for (int t = t0; t < t0 + frames; ++t) {
    Image<double> f(h, w, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)
          f(y, x, ch) = 0.5 + 0.3 * std::sin(2 * std::numbers::pi * (x - speed * t) / 9.0 + 0.7 * ch + 0.2 * y);
    v.push_back(f);
  }
  return v;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("all metrics vanish on identical videos") {
    // Two periods of random content, so the frames across the seam also occur inside the clip.
    std::mt19937_64 rng(1);
    Video v = testutil::random_video(4, 14, 15, rng);
    const Video period = v;
    v.insert(v.end(), period.begin(), period.end());
    MetricsConfig c;
    const MetricReport r = evaluate(v, v, c);
    CHECK(r.stderr_value == 0.0);
    CHECK(r.completeness == 0.0);
    CHECK(r.coherence == 0.0);
    CHECK(r.loopq == 0.0);
    CHECK(r.breakdown.size() == 3 * c.patches.size());
    for (const auto& b : r.breakdown) CHECK(b.value == 0.0);

    // Without periodic content only the seam term stays positive.
    const Video once(v.begin(), v.begin() + 4);
    const MetricReport q = evaluate(once, once, c);
    CHECK(q.coherence == 0.0);
    CHECK(q.completeness == 0.0);
    CHECK(q.loopq > 0.0);
  }

  TEST_CASE("STDerr closed form and order independence") {
    Video flat(4, Image<double>(3, 4, 3, 0.3)), flicker;
    for (int t = 0; t < 4; ++t) flicker.push_back(Image<double>(3, 4, 3, t % 2 ? 1.0 : 0.0));
    CHECK(stderr_metric(flicker, flat) == doctest::Approx(16256.25).epsilon(1e-12));
    CHECK(stderr_metric(flat, flicker) == doctest::Approx(16256.25).epsilon(1e-12));

    std::mt19937_64 rng(2);
    Video a = testutil::random_video(7, 5, 6, rng), b = testutil::random_video(5, 5, 6, rng);
    const double v = stderr_metric(a, b);
    CHECK(v > 0);
    std::shuffle(a.begin(), a.end(), rng);
    CHECK(stderr_metric(a, b) == doctest::Approx(v).epsilon(1e-12));
    CHECK_THROWS_AS(stderr_metric(a, testutil::random_video(5, 5, 7, rng)), DataError);
  }

  TEST_CASE("a periodically shifted copy is found exactly") {
    const Video v = drifting(6, 12, 12, 1.5);
    Video shifted(v.begin() + 1, v.end());
    shifted.push_back(v.front());
    const std::vector<PatchConfig> configs{{5, 1, 1, 0.0, true}};
    SearchSpec full{-1, 1};
    CHECK(bds_direction(v, shifted, configs, full) == 0.0);
    CHECK(bds_direction(shifted, v, configs, full) == 0.0);
    const std::vector<PatchConfig> temporal{{5, 3, 1, 0.0, true}};
    // Windows of the shifted copy all exist in the original except the wrapped ones.
    CHECK(bds_direction(drifting(4, 12, 12, 1.5, 1), v, temporal, full) == 0.0);
  }

  TEST_CASE("windowed search matches the exhaustive oracle") {
    std::mt19937_64 rng(3);
    const std::vector<std::vector<PatchConfig>> config_sets{
        {{3, 3, 1, 0.0, true}}, {{3, 2, 1, 0.0, true}, {5, 3, 2, 0.0, true}}, {{1, 1, 1, 0.0, true}}};
    for (int trial = 0; trial < 3; ++trial) {
      const Video src = testutil::random_video(6, 8, 8, rng), dst = testutil::random_video(6, 8, 8, rng);
      for (const auto& configs : config_sets)
        for (SearchSpec search : {SearchSpec{2, 1}, SearchSpec{2, 2}, SearchSpec{0, 3}, SearchSpec{-1, 1}}) {
          INFO("trial " << trial << " radius " << search.spatial_radius << " stride " << search.spatial_stride);
          const double ref = oracle(src, dst, configs, search, false);
          CHECK(std::abs(bds_direction(src, dst, configs, search) - ref) <= 1e-9 * std::max(1.0, ref));
          if (configs[0].temporal_size == 1) continue;  // single frames never straddle the seam
          const double lq = oracle(src, dst, configs, search, true);
          CHECK(std::abs(loopq(src, dst, configs, search) - lq) <= 1e-9 * std::max(1.0, lq));
        }
    }
  }

  TEST_CASE("a hard cut at the loop seam dominates LoopQ") {
    // The slow drift is smooth within the loop but jumps back when the loop restarts.
    const Video target = drifting(16, 14, 16, 0.5);
    Video loop(target.begin() + 2, target.begin() + 10);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    for (auto& f : loop)
      for (double& x : f.storage()) x += noise(rng);
    const std::vector<PatchConfig> configs{{5, 3, 1, 0.0, true}};
    const SearchSpec search{4, 2};
    const double coh = bds_direction(loop, target, configs, search);
    const double lq = loopq(loop, target, configs, search);
    INFO("coherence " << coh << " loopq " << lq);
    CHECK(coh > 0);
    CHECK(lq > 2 * coh);

    // A loop that is periodic in content has no seam to pay for.
    const Video periodic = drifting(6, 14, 16, 1.5);
    Video periodic_target = drifting(12, 14, 16, 1.5);
    CHECK(loopq(periodic, periodic_target, configs, {-1, 1}) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("when T equals s every window crosses the seam") {
    std::mt19937_64 rng(5);
    const Video src = testutil::random_video(3, 9, 9, rng), dst = testutil::random_video(5, 9, 9, rng);
    const std::vector<PatchConfig> configs{{3, 3, 1, 0.0, true}};
    CHECK(seam(3, configs[0]).size() == 3);
    const double lq = loopq(src, dst, configs, {2, 2});
    CHECK(lq == doctest::Approx(oracle(src, dst, configs, {2, 2}, true)).epsilon(1e-12));
    // The unwrapped window is one of the three, so it is no worse than their mean would allow.
    CHECK(bds_direction(src, dst, configs, {2, 2}) <= 3 * lq + 1e-12);
  }

  TEST_CASE("wider search never increases coherence") {
    std::mt19937_64 rng(6);
    const Video a = testutil::random_video(5, 16, 16, rng), b = testutil::random_video(7, 16, 16, rng);
    const std::vector<PatchConfig> configs{{3, 3, 1, 0.0, true}};
    double prev = std::numeric_limits<double>::infinity();
    for (int radius : {0, 1, 2, 4, 8, -1}) {
      const double v = bds_direction(a, b, configs, {radius, 3});
      CHECK(v >= 0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }

  TEST_CASE("evaluate agrees with the individual directions") {
    std::mt19937_64 rng(7);
    const Video synth = testutil::random_video(5, 13, 14, rng), target = testutil::random_video(8, 13, 14, rng);
    MetricsConfig c;
    c.patches = {{3, 3, 1, 0.0, true}, {5, 2, 1, 0.0, true}};
    c.search = {3, 2};
    const MetricReport r = evaluate(synth, target, c);
    CHECK(r.coherence == doctest::Approx(bds_direction(synth, target, c.patches, c.search)).epsilon(1e-12));
    CHECK(r.completeness == doctest::Approx(bds_direction(target, synth, c.patches, c.search)).epsilon(1e-12));
    CHECK(r.loopq == doctest::Approx(loopq(synth, target, c.patches, c.search)).epsilon(1e-12));
    CHECK(r.stderr_value == doctest::Approx(stderr_metric(synth, target)).epsilon(1e-12));
    CHECK(r.breakdown.size() == 6);

    const nlohmann::json j = report_to_json(r);
    CHECK(j["loopq"].get<double>() == r.loopq);
    CHECK(j["breakdown"].size() == 6);
    CHECK(report_table(r).find("LoopQ") != std::string::npos);
  }

  TEST_CASE("invalid inputs") {
    std::mt19937_64 rng(8);
    const Video v = testutil::random_video(2, 8, 8, rng);
    const std::vector<PatchConfig> configs{{3, 3, 1, 0.0, true}};
    CHECK_THROWS_AS(bds_direction(v, v, configs, {}), DataError);
    CHECK_THROWS_AS(loopq(v, testutil::random_video(4, 8, 8, rng), configs, {}), DataError);
    CHECK_THROWS_AS(bds_direction(v, v, {}, {}), DataError);
    CHECK_THROWS_AS(bds_direction(v, testutil::random_video(4, 9, 8, rng), {{3, 1, 1, 0.0, true}}, {}), DataError);
    CHECK_THROWS_AS(evaluate(Video{}, v, {}), DataError);
  }
}
