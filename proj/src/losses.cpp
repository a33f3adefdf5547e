#include "mtvloop/losses.hpp"

#include <algorithm>
#include <cmath>

namespace mtvloop {

namespace {

double sign(double v) { return double(v > 0) - double(v < 0); }

void check_grad(const Image<double>* grad, const Image<double>& like, const char* what) {
  if (grad) MTV_REQUIRE(grad->same_shape(like), std::string(what) + ": gradient buffer shape mismatch");
}

}  // namespace

double mse_loss(const Image<double>& pred, const Image<double>& target, Image<double>* grad, double weight) {
  MTV_REQUIRE(pred.same_shape(target), "mse_loss: shape mismatch");
  check_grad(grad, pred, "mse_loss");
  const double norm = 1.0 / double(pred.pixel_count());
  double sum = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double d = pred.storage()[i] - target.storage()[i];
    sum += d * d;
    if (grad) grad->storage()[i] += weight * 2.0 * d * norm;
  }
  return sum * norm;
}

double bce_loss(const Image<double>& pred, const Image<double>& target, Image<double>* grad, double weight) {
  MTV_REQUIRE(pred.same_shape(target), "bce_loss: shape mismatch");
  check_grad(grad, pred, "bce_loss");
  const double norm = 1.0 / double(pred.pixel_count());
  double sum = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double raw = pred.storage()[i];
    const double q = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
    const double p = target.storage()[i];
    sum += -(p * std::log(q) + (1 - p) * std::log(1 - q));
    if (grad && raw > kBceEpsilon && raw < 1.0 - kBceEpsilon)
      grad->storage()[i] += weight * norm * (-(p / q) + (1 - p) / (1 - q));
  }
  return sum * norm;
}

double tv_patch(const Image<double>& patch, double norm, Image<double>* grad, double weight) {
  check_grad(grad, patch, "tv_patch");
  const int h = patch.height(), w = patch.width(), c = patch.channels();
  const double inv = 1.0 / norm;
  double sum = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* p = patch.pixel(y, x);
      for (int ch = 0; ch < c; ++ch) {
        if (x + 1 < w) {
          double d = patch(y, x + 1, ch) - p[ch];
          sum += std::abs(d);
          if (grad) {
            double g = weight * inv * sign(d);
            (*grad)(y, x + 1, ch) += g;
            (*grad)(y, x, ch) -= g;
          }
        }
        if (y + 1 < h) {
          double d = patch(y + 1, x, ch) - p[ch];
          sum += std::abs(d);
          if (grad) {
            double g = weight * inv * sign(d);
            (*grad)(y + 1, x, ch) += g;
            (*grad)(y, x, ch) -= g;
          }
        }
      }
    }
  }
  return sum * inv;
}

double tv_loss(const Mpi& mpi, MpiGrad<double>* grad, double weight) {
  mpi.validate();
  const double hw = double(mpi.height()) * mpi.width();
  double total = 0;
  for (int d = 0; d < mpi.depth_count(); ++d)
    total += tv_patch(mpi.planes[d], hw, grad ? &grad->planes[d] : nullptr, weight);
  return total;
}

double sparsity_loss(const Mpi& mpi, MpiGrad<double>* grad, double weight) {
  mpi.validate();
  const int depth = mpi.depth_count();
  const size_t n = size_t(mpi.height()) * mpi.width();
  const double inv = 1.0 / double(n);
  double total = 0;
  std::vector<double> beta(depth);
  for (size_t i = 0; i < n; ++i) {
    double l1 = 0, l2sq = 0;
    for (int d = 0; d < depth; ++d) {
      beta[d] = mpi.planes[d].storage()[i * 4 + 3];
      l1 += std::abs(beta[d]);
      l2sq += beta[d] * beta[d];
    }
    const double l2 = std::sqrt(l2sq);
    if (l2 < 1e-8) continue;
    total += l1 / l2;
    if (grad) {
      for (int d = 0; d < depth; ++d) {
        double g = sign(beta[d]) / l2 - l1 * beta[d] / (l2sq * l2);
        grad->planes[d].storage()[i * 4 + 3] += weight * inv * g;
      }
    }
  }
  return total * inv;
}

double stage1_total(const Stage1Losses& l, double lambda_tv, double lambda_spa) {
  return l.mse + l.bce + lambda_tv * l.tv + lambda_spa * l.spa;
}

}  // namespace mtvloop
