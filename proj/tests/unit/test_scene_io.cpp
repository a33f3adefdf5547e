#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "helpers.hpp"
#include "mtvloop/png_io.hpp"
#include "mtvloop/scene_io.hpp"

using namespace mtvloop;
using testutil::make_camera;

namespace {

void write_view(const fs::path& dir, const CameraModel& cam, int frames, std::mt19937_64& rng, int odd_frame = -1) {
  fs::create_directories(dir);
  nlohmann::json j = camera_to_json(cam);
  std::ofstream(dir / "camera.json") << j.dump();
  for (int f = 0; f < frames; ++f) {
    const int w = f == odd_frame ? cam.width + 1 : cam.width;
    Image<uint8_t> img(cam.height, w, 3);
    for (auto& v : img.storage()) v = uint8_t(rng() % 256);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.png", f);
    write_png(dir / name, img);
  }
}

VideoClip clip_of(int frames, int h, int w, auto value) {
  VideoClip c;
  for (int t = 0; t < frames; ++t) {
    Image<double> f(h, w, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch) f(y, x, ch) = value(t, y, x, ch);
    c.frames.push_back(f);
  }
  return c;
}

bool binary(const Image<double>& m) {
  return std::all_of(m.storage().begin(), m.storage().end(), [](double v) { return v == 0.0 || v == 1.0; });
}

}  // namespace

TEST_SUITE("scene_io") {
  TEST_CASE("two small views load with their sizes") {
    std::mt19937_64 rng(1);
    fs::path root = testutil::temp_dir("scene_small");
    write_view(root / "view_01", make_camera(8, 8, 8, 0.1), 4, rng);
    write_view(root / "view_00", make_camera(8, 8, 8), 4, rng);
    Dataset ds = load_dataset(root);
    REQUIRE(ds.views.size() == 2);
    CHECK(ds.views[0].name == "view_00");
    CHECK(ds.views[1].name == "view_01");
    for (const auto& v : ds.views) {
      CHECK(v.clip.frame_count() == 4);
      CHECK(v.clip.height() == 8);
      CHECK(v.clip.width() == 8);
      CHECK(v.average_image.height() == 8);
      CHECK(v.loopable_mask2d.width() == 8);
      CHECK(binary(v.loopable_mask2d));
      for (const auto& f : v.clip.frames)
        for (double x : f.storage()) CHECK((x >= 0.0 && x <= 1.0));
    }
    CHECK(ds.views[1].camera == make_camera(8, 8, 8, 0.1));
    CHECK(ds.scene.near == 1.0);
  }

  TEST_CASE("malformed datasets are rejected") {
    std::mt19937_64 rng(2);
    fs::path root = testutil::temp_dir("scene_bad");
    write_view(root / "view_00", make_camera(8, 8, 8), 4, rng);
    CHECK_THROWS_WITH_AS(load_dataset(root), doctest::Contains("fewer than 2 views"), DataError);

    write_view(root / "view_01", make_camera(8, 8, 8), 4, rng, 2);
    CHECK_THROWS_WITH_AS(load_dataset(root), doctest::Contains("inconsistent resolution"), DataError);

    fs::remove_all(root / "view_01");
    write_view(root / "view_01", make_camera(8, 8, 8), 4, rng);
    fs::remove(root / "view_01" / "camera.json");
    CHECK_THROWS_WITH_AS(load_dataset(root), doctest::Contains("missing camera file"), DataError);

    fs::remove_all(root / "view_01");
    write_view(root / "view_01", make_camera(8, 8, 8), 4, rng);
    fs::remove(root / "view_01" / "frame_0001.png");
    CHECK_THROWS_WITH_AS(load_dataset(root), doctest::Contains("contiguous"), DataError);

    CHECK_THROWS_AS(load_dataset(root / "nowhere"), DataError);
  }

  TEST_CASE("scene info") {
    fs::path root = testutil::temp_dir("scene_info");
    write_scene_info(root, {0.5, 20.0, 12.5});
    SceneInfo s = read_scene_info(root);
    CHECK(s.near == 0.5);
    CHECK(s.far == 20.0);
    CHECK(s.fps == 12.5);
    std::ofstream(root / "scene.json") << R"({"near": 3, "far": 2})";
    CHECK_THROWS_AS(read_scene_info(root), DataError);
    CHECK(min_period_frames({}, 25.0) == 8);
    CHECK(min_period_frames({}, 12.5) == 4);
    CHECK(min_period_frames({}, 2.0) == 2);
  }

  TEST_CASE("average image") {
    const Image<double> flat = average_image(clip_of(4, 3, 5, [](int, int, int, int) { return 0.5; }));
    for (double v : flat.storage()) CHECK(v == 0.5);
    const Image<double> mid = average_image(clip_of(2, 2, 2, [](int t, int, int, int) { return double(t); }));
    for (double v : mid.storage()) CHECK(v == 0.5);

    std::mt19937_64 rng(3);
    VideoClip r;
    r.frames = testutil::random_video(3, 4, 6, rng);
    Image<double> avg = average_image(r);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x)
        for (int ch = 0; ch < 3; ++ch) {
          double s = 0;
          for (int t = 0; t < 3; ++t) s += r.frames[t](y, x, ch);
          CHECK(std::abs(avg(y, x, ch) - s / 3) < 1e-7);
        }

    VideoClip perm = r;
    std::swap(perm.frames[0], perm.frames[2]);
    CHECK(testutil::max_abs_diff(average_image(perm), avg) < 1e-15);
    CHECK_THROWS_AS(average_image(VideoClip{}), DataError);
  }

  TEST_CASE("loopable mask cases") {
    VideoClip still = clip_of(15, 5, 5, [](int, int y, int x, int) { return 0.1 * (y + x) / 8.0 + 0.3; });
    Image<double> m = loopable_mask2d(still, 1e-3, 5e-3, 2);
    for (double v : m.storage()) CHECK(v == 0.0);

    VideoClip periodic = clip_of(15, 5, 5, [](int t, int, int, int ch) {
      return 0.5 + 0.3 * std::sin(2 * std::numbers::pi * t / 5.0 + ch);
    });
    m = loopable_mask2d(periodic, 1e-3, 5e-3, 2);
    for (double v : m.storage()) CHECK(v == 1.0);

    // No admissible period is a multiple of 5 in nine frames once P ≥ 6.
    VideoClip nine = periodic;
    nine.frames.resize(9);
    m = loopable_mask2d(nine, 1e-3, 5e-3, 6);
    for (double v : m.storage()) CHECK(v == 0.0);

    VideoClip ramp = clip_of(15, 5, 5, [](int t, int, int, int) { return t / 14.0; });
    m = loopable_mask2d(ramp, 1e-3, 1e-3, 2);
    for (double v : m.storage()) CHECK(v == 0.0);

    CHECK_THROWS_AS(loopable_mask2d(clip_of(3, 2, 2, [](int, int, int, int) { return 0.0; }), 1e-3, 1e-3, 2),
                    DataError);
  }

  TEST_CASE("loopable mask is binary and deterministic on noise") {
    std::mt19937_64 rng(4);
    VideoClip c;
    c.frames = testutil::random_video(10, 6, 7, rng);
    Image<double> a = loopable_mask2d(c, 1e-3, 0.5, 3);
    CHECK(binary(a));
    CHECK(loopable_mask2d(c, 1e-3, 0.5, 3) == a);
  }

  TEST_CASE("synthetic dataset loads back bit-identically") {
    fs::path root = testutil::temp_dir("scene_synth");
    SyntheticScene scene = make_synthetic_scene(desk_scene_spec(3, 12), root);
    Dataset ds = load_dataset(root);
    REQUIRE(ds.views.size() == 3);
    for (size_t v = 0; v < 3; ++v) CHECK(ds.views[v].clip.frames == scene.clips[v].frames);
    CHECK(ds.scene.fps == 25.0);
    CHECK(fs::exists(root / "ground_truth" / "mpi.ckpt"));
    CHECK(fs::exists(root / "ground_truth" / "view_00_loopmask.png"));
  }

  TEST_CASE("a single opaque plane appears warped in every view") {
    SceneSpec spec;
    spec.reference = make_camera(40, 30, 36);
    spec.cameras = {make_camera(40, 30, 36, -0.1, 0.05), make_camera(40, 30, 36, 0.15, 0.0, 0.05, 0.02)};
    SyntheticPlane plane;
    plane.depth = 3.0;
    plane.x0 = plane.y0 = -100;
    plane.x1 = plane.y1 = 100;
    plane.seed = 9;
    spec.planes = {plane};
    spec.frame_count = 3;
    spec.near = 1;
    spec.far = 5;
    SyntheticScene scene = make_synthetic_scene(spec, testutil::temp_dir("scene_plane"));
    const Image<double> tex = synthetic_plane_rgba(plane, 30, 40, 0);
    for (size_t v = 0; v < 2; ++v) {
      Image<double> warped = warp_bilinear(tex, plane_homography(spec.reference, spec.cameras[v], 3.0), 30, 40);
      Image<double> avg = average_image(scene.clips[v]);
      double err = 0;
      for (size_t i = 0; i < avg.pixel_count(); ++i)
        for (int ch = 0; ch < 3; ++ch)
          err = std::max(err, std::abs(avg.storage()[i * 3 + ch] -
                                       warped.storage()[i * 4 + ch] * warped.storage()[i * 4 + 3]));
      CHECK(err <= 0.5 / 255 + 1e-9);
    }
  }

  TEST_CASE("loopable mask of an animated plane equals the ground-truth animation mask") {
    SceneSpec spec;
    spec.reference = make_camera(32, 24, 30);
    spec.cameras = {spec.reference};
    SyntheticPlane water;
    water.depth = 2.0;
    water.x0 = 6;
    water.y0 = 4;
    water.x1 = 25;
    water.y1 = 19;
    water.period = 6;
    water.seed = 5;
    spec.planes = {water};
    spec.frame_count = 12;
    spec.near = 1;
    spec.far = 5;
    SyntheticScene scene = make_synthetic_scene(spec, testutil::temp_dir("scene_anim"));
    Image<double> m = loopable_mask2d(scene.clips[0], 1e-3, 5e-3, 2);
    CHECK(m == scene.gt_masks[0]);
    double on = 0;
    for (double v : m.storage()) on += v;
    CHECK(on == 19 * 15);
  }

  TEST_CASE("invalid scene specs are rejected") {
    SceneSpec empty;
    CHECK_THROWS_AS(make_synthetic_scene(empty, testutil::temp_dir("scene_empty")), DataError);
    SceneSpec far_plane = desk_scene_spec(2, 4);
    far_plane.planes[0].depth = 50.0;
    CHECK_THROWS_WITH_AS(make_synthetic_scene(far_plane, testutil::temp_dir("scene_far")),
                         doctest::Contains("outside near/far"), DataError);
  }
}
