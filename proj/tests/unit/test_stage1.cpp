#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "mtvloop/renderer.hpp"
#include "mtvloop/stage1.hpp"

using namespace mtvloop;

namespace {

struct Fixture {
  SyntheticScene scene;
  Dataset data;
};

const Fixture& fixture(bool static_only) {
  static std::map<bool, Fixture> cache;
  auto it = cache.find(static_only);
  if (it == cache.end()) {
    Fixture f;
    fs::path root = testutil::temp_dir(static_only ? "stage1_plane" : "stage1_anim");
    f.scene = make_synthetic_scene(testutil::small_scene_spec(static_only), root);
    f.data = load_dataset(root);
    it = cache.emplace(static_only, std::move(f)).first;
  }
  return it->second;
}

Stage1Config small_config(int epochs) {
  Stage1Config c;
  c.planes = 4;
  c.epochs = epochs;
  c.window_h = 32;
  c.window_w = 48;
  c.seed = 3;
  return c;
}

const Stage1Result& trained() {
  static const Stage1Result r = train_stage1(fixture(false).data.views, small_config(30), 1.25, 5.0);
  return r;
}

}  // namespace

TEST_SUITE("stage1") {
  TEST_CASE("reference view is the one closest to the centroid") {
    const auto& views = fixture(false).data.views;
    CHECK(choose_reference_view(views) == 3);
  }

  TEST_CASE("initialization ranges") {
    Stage1Result r = init_stage1(testutil::make_camera(10, 8, 10), {1, 2, 4}, 5);
    REQUIRE(r.mpi.depth_count() == 3);
    for (const auto& p : r.mpi.planes)
      for (size_t i = 0; i < p.pixel_count(); ++i) {
        for (int c = 0; c < 3; ++c) {
          CHECK(p.storage()[i * 4 + c] >= 0.4);
          CHECK(p.storage()[i * 4 + c] <= 0.6);
        }
        CHECK(p.storage()[i * 4 + 3] == 0.5);
      }
    for (const auto& l : r.loopable.values)
      for (double v : l.storage()) CHECK(v == 0.5);
  }

  TEST_CASE("zero epochs return the initialization") {
    const auto& views = fixture(true).data.views;
    Stage1Result r = train_stage1(views, small_config(0), 1.25, 5.0);
    Stage1Result init = init_stage1(views[choose_reference_view(views)].camera, disparity_depths(1.25, 5.0, 4), 3);
    CHECK(r.mpi.planes == init.mpi.planes);
    CHECK(r.loopable.values == init.loopable.values);
    CHECK(r.epoch_loss.empty());
  }

  TEST_CASE("training is deterministic for a fixed seed") {
    const auto& views = fixture(true).data.views;
    Stage1Result a = train_stage1(views, small_config(2), 1.25, 5.0);
    Stage1Result b = train_stage1(views, small_config(2), 1.25, 5.0);
    CHECK(a.mpi.planes == b.mpi.planes);
    CHECK(a.loopable.values == b.loopable.values);
    CHECK(a.epoch_loss == b.epoch_loss);
    Stage1Config other = small_config(2);
    other.seed = 4;
    CHECK(train_stage1(views, other, 1.25, 5.0).mpi.planes != a.mpi.planes);
  }

  TEST_CASE("a single plane scene is reconstructed above 30 dB") {
    const auto& views = fixture(true).data.views;
    Stage1Result r = train_stage1(views, small_config(30), 1.25, 5.0);
    for (const auto& v : views) {
      auto rendered = render_mpi<double>(r.mpi, nullptr, RenderWindow::full(v.camera));
      const double p = testutil::psnr(rendered.rgb, v.average_image);
      INFO(v.name << " psnr " << p);
      CHECK(p > 30.0);
    }
  }

  TEST_CASE("rendered loop mask matches the ground-truth animation mask") {
    const Fixture& f = fixture(false);
    const Stage1Result& r = trained();
    for (size_t v = 0; v < f.data.views.size(); ++v) {
      auto rendered = render_mpi<double>(r.mpi, &r.loopable, RenderWindow::full(f.data.views[v].camera));
      double inter = 0, uni = 0;
      for (size_t i = 0; i < rendered.loop_mask.size(); ++i) {
        const bool a = rendered.loop_mask.storage()[i] > 0.5, b = f.scene.gt_masks[v].storage()[i] > 0.5;
        inter += a && b;
        uni += a || b;
      }
      INFO("view " << v << " IoU " << inter / uni);
      CHECK(inter / uni > 0.8);
    }
  }

  TEST_CASE("losses trend downward over the first ten epochs") {
    const auto& loss = trained().epoch_loss;
    REQUIRE(loss.size() >= 10);
    std::vector<double> avg;
    for (int i = 4; i < 10; ++i) avg.push_back((loss[i] + loss[i - 1] + loss[i - 2] + loss[i - 3] + loss[i - 4]) / 5);
    for (size_t i = 1; i < avg.size(); ++i) CHECK(avg[i] <= avg[i - 1]);
    for (double l : loss) CHECK(l >= 0);
  }

  TEST_CASE("invalid configurations are rejected") {
    const auto& views = fixture(true).data.views;
    Stage1Config c = small_config(1);
    c.planes = 1;
    CHECK_THROWS_AS(train_stage1(views, c, 1.25, 5.0), DataError);
    c = small_config(1);
    c.lambda_spa = -1;
    CHECK_THROWS_AS(train_stage1(views, c, 1.25, 5.0), DataError);
    CHECK_THROWS_AS(train_stage1({views[0]}, small_config(1), 1.25, 5.0), DataError);
  }
}
