#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mtvloop {

struct AdamHyper {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moments per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m, v;
  int64_t step = 0;
};

// One bias-corrected Adam update over all tensors. Parameters are clamped to [lo, hi]
// afterwards when `clamp` is set. Throws NumericError on non-finite gradients.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const AdamHyper& hyper, bool clamp = true, double lo = 0.0, double hi = 1.0);

}  // namespace mtvloop
