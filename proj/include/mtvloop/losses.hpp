#pragma once

#include "mtvloop/image.hpp"
#include "mtvloop/mpi.hpp"
#include "mtvloop/renderer.hpp"

namespace mtvloop {

// Each loss optionally accumulates weight·∂L/∂input into the given gradient buffer.

// Sum of squared differences over all channels divided by the pixel count h·w.
double mse_loss(const Image<double>& pred, const Image<double>& target, Image<double>* grad = nullptr,
                double weight = 1.0);

inline constexpr double kBceEpsilon = 1e-6;

// Mean over pixels of −(p·log p̂ + (1−p)·log(1−p̂)), with p̂ clamped to [ε, 1−ε].
double bce_loss(const Image<double>& pred, const Image<double>& target, Image<double>* grad = nullptr,
                double weight = 1.0);

// (1/HW)·(‖Δx M‖₁ + ‖Δy M‖₁) over all four channels of every plane (forward differences).
double tv_loss(const Mpi& mpi, MpiGrad<double>* grad = nullptr, double weight = 1.0);

// Same as tv_loss restricted to one RGBA patch, normalized by `norm` instead of HW.
double tv_patch(const Image<double>& patch, double norm, Image<double>* grad = nullptr, double weight = 1.0);

// (1/HW)·Σ_pixels ‖β‖₁/‖β‖₂ over the per-pixel alpha vectors; 0 where ‖β‖₂ < 1e-8.
double sparsity_loss(const Mpi& mpi, MpiGrad<double>* grad = nullptr, double weight = 1.0);

struct Stage1Losses {
  double mse = 0, bce = 0, tv = 0, spa = 0;
};

// L_mse + L_bce + λ_tv·L_tv + λ_spa·L_spa.
double stage1_total(const Stage1Losses& l, double lambda_tv, double lambda_spa);

}  // namespace mtvloop
