#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mtvloop/image.hpp"
#include "mtvloop/looping.hpp"

namespace mtvloop {

// Candidate positions for the patch search: destination centres within ±spatial_radius of
// the source centre (negative = whole frame) and every temporal start.
struct SearchSpec {
  int spatial_radius = 8;
  int spatial_stride = 4;  // spacing of source patch centres
};

struct MetricsConfig {
  std::vector<PatchConfig> patches{{7, 3, 1, 0.0, true}, {11, 3, 1, 0.0, true}};
  SearchSpec search;
};

// Temporal standard deviation maps (0–255 scale, population STD) of both videos; returns
// their mean squared difference.
double stderr_metric(const Video& synthetic, const Video& target);

// Mean over source patches of the best patch MSE against dst, averaged over configs, ×100.
// Source patches do not wrap in time.
double bds_direction(const Video& src, const Video& dst, const std::vector<PatchConfig>& configs,
                     const SearchSpec& search);

// Same as the coherence direction but using only the synthetic loop's patches that cross
// the last→first frame boundary under circular indexing.
double loopq(const Video& synthetic, const Video& target, const std::vector<PatchConfig>& configs,
             const SearchSpec& search);

struct MetricBreakdown {
  std::string metric;
  PatchConfig patch;
  double value = 0;
};

struct MetricReport {
  double stderr_value = 0;
  double completeness = 0;
  double coherence = 0;
  double loopq = 0;
  std::vector<MetricBreakdown> breakdown;
};

MetricReport evaluate(const Video& synthetic, const Video& target, const MetricsConfig& config);

nlohmann::json report_to_json(const MetricReport& report);
std::string report_table(const MetricReport& report);

}  // namespace mtvloop
