#include "mtvloop/stage1.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "mtvloop/geometry.hpp"

namespace mtvloop {

void Stage1Config::validate() const {
  MTV_REQUIRE(lambda_tv >= 0 && lambda_spa >= 0, "stage1: loss weights must be non-negative");
  MTV_REQUIRE(planes >= 2, "stage1: need at least 2 planes");
  MTV_REQUIRE(window_h > 0 && window_w > 0, "stage1: window must be non-empty");
  MTV_REQUIRE(epochs >= 0 && windows_per_view > 0, "stage1: invalid iteration counts");
  MTV_REQUIRE(adam.lr > 0 && adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0,
              "stage1: invalid Adam hyperparameters");
}

size_t choose_reference_view(const std::vector<ViewRecord>& views) {
  MTV_REQUIRE(!views.empty(), "choose_reference_view: no views");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : views) centroid += v.camera.center();
  centroid /= double(views.size());
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < views.size(); ++i) {
    double d = (views[i].camera.center() - centroid).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Stage1Result init_stage1(const CameraModel& reference, const std::vector<double>& depths, uint64_t seed) {
  Stage1Result r;
  r.mpi.stack.reference = reference;
  r.mpi.stack.depths = depths;
  r.mpi.stack.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rgb(0.4, 0.6);
  for (size_t d = 0; d < depths.size(); ++d) {
    Image<double> plane(reference.height, reference.width, 4);
    for (size_t i = 0; i < plane.pixel_count(); ++i) {
      for (int ch = 0; ch < 3; ++ch) plane.storage()[i * 4 + ch] = rgb(rng);
      plane.storage()[i * 4 + 3] = 0.5;
    }
    r.mpi.planes.push_back(std::move(plane));
    r.loopable.values.emplace_back(reference.height, reference.width, 1, 0.5);
  }
  return r;
}

double stage1_objective(const Mpi& mpi, const LoopableVolume& loopable, const ViewRecord& view,
                        const RenderWindow& window, const Stage1Config& config, MpiGrad<double>* grad,
                        Stage1Losses* parts) {
  RenderRecord<double> record;
  auto rendered = render_mpi<double>(mpi, &loopable, window, grad ? &record : nullptr);
  Image<double> target_rgb = view.average_image.crop(window.row, window.col, window.height, window.width);
  Image<double> target_mask = view.loopable_mask2d.crop(window.row, window.col, window.height, window.width);

  Stage1Losses l;
  Image<double> d_rgb, d_mask;
  if (grad) {
    d_rgb = Image<double>(window.height, window.width, 3);
    d_mask = Image<double>(window.height, window.width, 1);
  }
  l.mse = mse_loss(rendered.rgb, target_rgb, grad ? &d_rgb : nullptr);
  l.bce = bce_loss(rendered.loop_mask, target_mask, grad ? &d_mask : nullptr);
  l.tv = tv_loss(mpi, grad, config.lambda_tv);
  l.spa = sparsity_loss(mpi, grad, config.lambda_spa);
  if (grad) render_backward(record, d_rgb, &d_mask, *grad);
  if (parts) *parts = l;
  return stage1_total(l, config.lambda_tv, config.lambda_spa);
}

Stage1Result train_stage1(const std::vector<ViewRecord>& views, const Stage1Config& config, double near, double far) {
  config.validate();
  MTV_REQUIRE(views.size() >= 2, "train_stage1: need at least 2 views");
  const size_t ref_idx = choose_reference_view(views);
  const CameraModel& ref = views[ref_idx].camera;
  Stage1Result result = init_stage1(ref, disparity_depths(near, far, config.planes), config.seed);
  if (config.epochs == 0) return result;

  std::mt19937_64 rng(config.seed ^ 0x5354414745310000ull);
  std::uniform_int_distribution<size_t> pick_view(0, views.size() - 1);
  MpiGrad<double> grad = MpiGrad<double>::zeros_like(result.mpi);
  AdamState adam;

  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> grads;
  for (int d = 0; d < result.mpi.depth_count(); ++d) {
    params.emplace_back(result.mpi.planes[d].storage());
    params.emplace_back(result.loopable.values[d].storage());
    grads.emplace_back(grad.planes[d].storage());
    grads.emplace_back(grad.loopable[d].storage());
  }

  const int iterations = int(views.size()) * config.windows_per_view;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0;
    for (int it = 0; it < iterations; ++it) {
      const ViewRecord& view = views[pick_view(rng)];
      RenderWindow win;
      win.view = view.camera;
      win.height = std::min(config.window_h, view.camera.height);
      win.width = std::min(config.window_w, view.camera.width);
      win.row = std::uniform_int_distribution<int>(0, view.camera.height - win.height)(rng);
      win.col = std::uniform_int_distribution<int>(0, view.camera.width - win.width)(rng);
      grad.zero();
      sum += stage1_objective(result.mpi, result.loopable, view, win, config, &grad);
      adam_step(params, grads, adam, config.adam, true);
    }
    result.epoch_loss.push_back(sum / iterations);
  }
  return result;
}

}  // namespace mtvloop
