#include "mtvloop/adam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtvloop/error.hpp"

namespace mtvloop {

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const AdamHyper& hyper, bool clamp, double lo, double hi) {
  MTV_REQUIRE(params.size() == grads.size(), "adam_step: parameter/gradient tensor count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  MTV_REQUIRE(state.m.size() == params.size(), "adam_step: state does not match parameters");
  for (size_t k = 0; k < params.size(); ++k) {
    MTV_REQUIRE(params[k].size() == grads[k].size() && state.m[k].size() == params[k].size(),
                "adam_step: shape mismatch in tensor " + std::to_string(k));
    for (size_t i = 0; i < grads[k].size(); ++i)
      if (!std::isfinite(grads[k][i]))
        throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(k) + " at element " +
                           std::to_string(i) + " (step " + std::to_string(state.step + 1) + ")");
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, double(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    const auto& g = grads[k];
    auto& p = params[k];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = hyper.beta1 * m[i] + (1 - hyper.beta1) * g[i];
      v[i] = hyper.beta2 * v[i] + (1 - hyper.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      p[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
      if (clamp) p[i] = std::clamp(p[i], lo, hi);
    }
  }
}

}  // namespace mtvloop
