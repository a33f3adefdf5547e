#include "mtvloop/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>

#include <json.hpp>

#include "mtvloop/checkpoint.hpp"
#include "mtvloop/geometry.hpp"
#include "mtvloop/png_io.hpp"
#include "mtvloop/renderer.hpp"

namespace mtvloop {

using nlohmann::json;

void VideoClip::validate() const {
  MTV_REQUIRE(frames.size() >= 2, "video clip: need at least 2 frames");
  for (const auto& f : frames) {
    MTV_REQUIRE(f.channels() == 3, "video clip: frames must be RGB");
    MTV_REQUIRE(f.height() == height() && f.width() == width(), "video clip: inconsistent resolution");
  }
  MTV_REQUIRE(fps > 0, "video clip: fps must be positive");
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.png", i);
  return buf;
}

std::string view_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%02d", i);
  return buf;
}

ViewRecord load_view(const fs::path& dir, double fps, const DatasetConfig& config) {
  ViewRecord view;
  view.name = dir.filename().string();
  fs::path cam_path = dir / "camera.json";
  if (!fs::exists(cam_path)) throw DataError("missing camera file: " + cam_path.string());
  view.camera = camera_from_json(read_json(cam_path));

  static const std::regex frame_re(R"(frame_(\d{4})\.png)");
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    std::string name = e.path().filename().string();
    if (e.is_regular_file() && std::regex_match(name, m, frame_re)) files.emplace_back(std::stoi(m[1]), e.path());
  }
  std::sort(files.begin(), files.end());
  for (size_t i = 0; i < files.size(); ++i)
    MTV_REQUIRE(files[i].first == int(i), "view " + view.name + ": frame numbering must be contiguous from 0000");

  view.clip.fps = fps;
  for (const auto& [idx, path] : files) {
    Image<double> f = dequantize_u8(read_png(path, 3));
    if (!view.clip.frames.empty() && !f.same_shape(view.clip.frames.front()))
      throw DataError("view " + view.name + ": inconsistent resolution in " + path.filename().string());
    view.clip.frames.push_back(std::move(f));
  }
  view.clip.validate();
  MTV_REQUIRE(view.clip.width() == view.camera.width && view.clip.height() == view.camera.height,
              "view " + view.name + ": camera size differs from frame size");
  view.average_image = average_image(view.clip);
  const int min_period = min_period_frames(config, fps);
  if (view.clip.frame_count() > min_period && view.clip.frame_count() >= 4)
    view.loopable_mask2d = loopable_mask2d(view.clip, config.var_thresh, config.loop_thresh, min_period);
  else
    view.loopable_mask2d = Image<double>(view.clip.height(), view.clip.width(), 1);  // no admissible period
  return view;
}

}  // namespace

SceneInfo read_scene_info(const fs::path& root) {
  SceneInfo info;
  fs::path p = root / "scene.json";
  if (!fs::exists(p)) return info;
  json j = read_json(p);
  info.near = j.value("near", info.near);
  info.far = j.value("far", info.far);
  info.fps = j.value("fps", info.fps);
  MTV_REQUIRE(info.near > 0 && info.far > info.near, "scene.json: invalid near/far");
  MTV_REQUIRE(info.fps > 0, "scene.json: invalid fps");
  return info;
}

void write_scene_info(const fs::path& root, const SceneInfo& info) {
  write_json(root / "scene.json", {{"near", info.near}, {"far", info.far}, {"fps", info.fps}});
}

Dataset load_dataset(const fs::path& root, const DatasetConfig& config) {
  if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root.string());
  Dataset ds;
  ds.scene = read_scene_info(root);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && e.path().filename().string().starts_with("view_")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) ds.views.push_back(load_view(d, ds.scene.fps, config));
  MTV_REQUIRE(ds.views.size() >= 2, "dataset: fewer than 2 views in " + root.string());
  return ds;
}

Image<double> average_image(const VideoClip& clip) {
  MTV_REQUIRE(!clip.frames.empty(), "average_image: empty clip");
  Image<double> avg(clip.height(), clip.width(), 3);
  for (const auto& f : clip.frames) {
    MTV_REQUIRE(f.same_shape(avg), "average_image: inconsistent resolution");
    for (size_t i = 0; i < avg.size(); ++i) avg.storage()[i] += f.storage()[i];
  }
  const double inv = 1.0 / double(clip.frames.size());
  for (double& v : avg.storage()) v *= inv;
  return avg;
}

int min_period_frames(const DatasetConfig& config, double fps) {
  return std::max(2, int(std::lround(config.min_period_full_rate * fps / config.full_rate_fps)));
}

Image<double> loopable_mask2d(const VideoClip& clip, double var_thresh, double loop_thresh, int min_period) {
  const int nf = clip.frame_count(), h = clip.height(), w = clip.width();
  MTV_REQUIRE(min_period >= 2, "loopable_mask2d: minimum period must be at least 2");
  MTV_REQUIRE(nf >= 4 && nf > min_period, "loopable_mask2d: clip too short for the minimum period");
  const size_t n = size_t(h) * w;

  // Mean over channels of the per-channel temporal variance.
  std::vector<double> variance(n, 0.0);
  Image<double> mean = average_image(clip);
  for (const auto& f : clip.frames)
    for (size_t i = 0; i < n; ++i)
      for (int ch = 0; ch < 3; ++ch) {
        double d = f.storage()[i * 3 + ch] - mean.storage()[i * 3 + ch];
        variance[i] += d * d;
      }
  for (double& v : variance) v /= double(nf) * 3.0;

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> mismatch(n);
  for (int period = min_period; period <= nf - 1; ++period) {
    for (int t0 = 0; t0 + period < nf; ++t0) {
      const auto& a = clip.frames[t0].storage();
      const auto& b = clip.frames[t0 + period].storage();
      for (size_t i = 0; i < n; ++i) {
        double s = 0;
        for (int ch = 0; ch < 3; ++ch) {
          double d = a[i * 3 + ch] - b[i * 3 + ch];
          s += d * d;
        }
        mismatch[i] = s;
      }
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double s = 0;
          int cnt = 0;
          for (int dy = -1; dy <= 1; ++dy) {
            int yy = y + dy;
            if (yy < 0 || yy >= h) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              int xx = x + dx;
              if (xx < 0 || xx >= w) continue;
              s += mismatch[size_t(yy) * w + xx];
              ++cnt;
            }
          }
          size_t i = size_t(y) * w + x;
          best[i] = std::min(best[i], s / cnt);
        }
      }
    }
  }

  Image<double> mask(h, w, 1);
  for (size_t i = 0; i < n; ++i) mask.storage()[i] = (variance[i] > var_thresh && best[i] < loop_thresh) ? 1.0 : 0.0;
  return mask;
}

// --- synthetic scenes -------------------------------------------------------

namespace {

struct TextureParams {
  double base[3], phase[3], phase2[3];
  double dir[2], dir2[2];
};

TextureParams texture_params(uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TextureParams p;
  for (int ch = 0; ch < 3; ++ch) {
    p.base[ch] = 0.3 + 0.4 * u(rng);
    p.phase[ch] = 2 * std::numbers::pi * u(rng);
    p.phase2[ch] = 2 * std::numbers::pi * u(rng);
  }
  double a = std::numbers::pi * u(rng), b = std::numbers::pi * u(rng);
  p.dir[0] = std::cos(a);
  p.dir[1] = std::sin(a);
  p.dir2[0] = std::cos(b);
  p.dir2[1] = std::sin(b);
  return p;
}

}  // namespace

Image<double> synthetic_plane_rgba(const SyntheticPlane& plane, int height, int width, int time) {
  const TextureParams tp = texture_params(plane.seed);
  const double two_pi = 2 * std::numbers::pi;
  Image<double> img(height, width, 4);
  const double motion = plane.period > 0 ? double(wrap_frame(time, plane.period)) / plane.period : 0.0;
  for (int y = std::max(0, plane.y0); y < std::min(height, plane.y1); ++y) {
    for (int x = std::max(0, plane.x0); x < std::min(width, plane.x1); ++x) {
      double s1 = (x * tp.dir[0] + y * tp.dir[1]) / plane.wavelength;
      double s2 = (x * tp.dir2[0] + y * tp.dir2[1]) / (1.7 * plane.wavelength);
      double* px = img.pixel(y, x);
      for (int ch = 0; ch < 3; ++ch) {
        double v;
        if (plane.period > 0) {
          v = tp.base[ch] + plane.amplitude * std::sin(two_pi * (s1 - motion) + tp.phase[ch]) +
              0.08 * std::sin(two_pi * s2 + tp.phase2[ch]);
        } else {
          v = tp.base[ch] + 0.2 * std::sin(two_pi * s1 + tp.phase[ch]) + 0.1 * std::sin(two_pi * s2 + tp.phase2[ch]);
        }
        px[ch] = std::clamp(v, 0.0, 1.0);
      }
      px[3] = 1.0;
    }
  }
  return img;
}

SyntheticScene make_synthetic_scene(const SceneSpec& spec, const fs::path& root) {
  MTV_REQUIRE(!spec.planes.empty(), "synthetic scene: no planes");
  MTV_REQUIRE(!spec.cameras.empty(), "synthetic scene: no cameras");
  MTV_REQUIRE(spec.start_frames.empty() || spec.start_frames.size() == spec.cameras.size(),
              "synthetic scene: start_frames must match camera count");
  MTV_REQUIRE(spec.frame_count >= 2, "synthetic scene: need at least 2 frames");
  MTV_REQUIRE(spec.near > 0 && spec.far > spec.near, "synthetic scene: invalid near/far");
  spec.reference.validate();
  for (const auto& p : spec.planes)
    MTV_REQUIRE(p.depth >= spec.near && p.depth <= spec.far, "synthetic scene: plane outside near/far range");

  // Scene planes rendered at their exact depths, sorted near→far.
  std::vector<SyntheticPlane> planes = spec.planes;
  std::sort(planes.begin(), planes.end(), [](const auto& a, const auto& b) { return a.depth < b.depth; });
  PlaneStack scene_stack;
  scene_stack.reference = spec.reference;
  for (const auto& p : planes) scene_stack.depths.push_back(p.depth);
  for (size_t i = 1; i < planes.size(); ++i)
    MTV_REQUIRE(planes[i].depth > planes[i - 1].depth, "synthetic scene: plane depths must be distinct");

  const int rh = spec.reference.height, rw = spec.reference.width;
  LoopableVolume animated;
  for (const auto& p : planes) {
    Image<double> a(rh, rw, 1);
    if (p.period > 0)
      for (int y = std::max(0, p.y0); y < std::min(rh, p.y1); ++y)
        for (int x = std::max(0, p.x0); x < std::min(rw, p.x1); ++x) a(y, x) = 1.0;
    animated.values.push_back(std::move(a));
  }

  fs::create_directories(root);
  SyntheticScene scene;
  for (size_t v = 0; v < spec.cameras.size(); ++v) {
    const CameraModel& cam = spec.cameras[v];
    cam.validate();
    fs::path dir = root / view_name(int(v));
    fs::create_directories(dir);
    write_json(dir / "camera.json", camera_to_json(cam));

    const int start = spec.start_frames.empty() ? 0 : spec.start_frames[v];
    VideoClip clip;
    clip.fps = spec.fps;
    Image<double> mask;
    for (int f = 0; f < spec.frame_count; ++f) {
      Mpi frame_mpi;
      frame_mpi.stack = scene_stack;
      for (const auto& p : planes) frame_mpi.planes.push_back(synthetic_plane_rgba(p, rh, rw, start + f));
      auto rendered = render_mpi<double>(frame_mpi, f == 0 ? &animated : nullptr, RenderWindow::full(cam));
      if (f == 0) {
        mask = Image<double>(cam.height, cam.width, 1);
        for (size_t i = 0; i < mask.size(); ++i) mask.storage()[i] = rendered.loop_mask.storage()[i] > 0.5 ? 1.0 : 0.0;
      }
      Image<uint8_t> q = quantize_u8(rendered.rgb);
      write_png(dir / frame_name(f), q);
      clip.frames.push_back(dequantize_u8(q));
    }
    scene.clips.push_back(std::move(clip));
    scene.gt_masks.push_back(std::move(mask));
  }
  write_scene_info(root, {spec.near, spec.far, spec.fps});

  // Ground-truth MPI: time-averaged planes snapped to the nearest disparity plane.
  scene.gt_mpi.stack.reference = spec.reference;
  scene.gt_mpi.stack.depths = disparity_depths(spec.near, spec.far, spec.mpi_planes);
  for (int d = 0; d < spec.mpi_planes; ++d) {
    scene.gt_mpi.planes.emplace_back(rh, rw, 4);
    scene.gt_loopable.values.emplace_back(rh, rw, 1);
  }
  for (size_t k = 0; k < planes.size(); ++k) {
    const auto& p = planes[k];
    int best = 0;
    for (int d = 1; d < spec.mpi_planes; ++d)
      if (std::abs(1.0 / scene.gt_mpi.stack.depths[d] - 1.0 / p.depth) <
          std::abs(1.0 / scene.gt_mpi.stack.depths[best] - 1.0 / p.depth))
        best = d;
    const int span = std::max(1, p.period);
    Image<double> avg(rh, rw, 4);
    for (int t = 0; t < span; ++t) {
      Image<double> f = synthetic_plane_rgba(p, rh, rw, t);
      for (size_t i = 0; i < avg.size(); ++i) avg.storage()[i] += f.storage()[i] / span;
    }
    Image<double>& dst = scene.gt_mpi.planes[best];
    for (size_t i = 0; i < avg.pixel_count(); ++i) {
      if (avg.storage()[i * 4 + 3] <= 0) continue;
      std::copy_n(avg.storage().data() + i * 4, 4, dst.storage().data() + i * 4);
      scene.gt_loopable.values[best].storage()[i] = animated.values[k].storage()[i];
    }
  }
  fs::path gt = root / "ground_truth";
  fs::create_directories(gt);
  save_stage1_checkpoint(gt / "mpi.ckpt", scene.gt_mpi, scene.gt_loopable);
  for (size_t v = 0; v < scene.gt_masks.size(); ++v)
    write_png(gt / (view_name(int(v)) + "_loopmask.png"), quantize_u8(scene.gt_masks[v]));
  return scene;
}

SceneSpec desk_scene_spec(int views, int frame_count) {
  MTV_REQUIRE(views >= 2 && views <= 8, "desk scene: 2..8 views supported");
  SceneSpec spec;
  CameraModel ref;
  ref.width = 160;
  ref.height = 90;
  ref.fx = ref.fy = 150.0;
  ref.cx = 79.5;
  ref.cy = 44.5;
  spec.reference = ref;
  // Camera centers (scene units); at disparity 0.4 a 0.05 baseline is a 3 px shift.
  const double centers[8][2] = {{-0.10, -0.05}, {0.00, -0.05}, {0.10, -0.05}, {-0.10, 0.05},
                                {0.00, 0.05},   {0.10, 0.05},  {-0.05, 0.00}, {0.05, 0.00}};
  const int starts[8] = {0, 7, 3, 11, 2, 9, 5, 13};
  // The last entry is the interior view so the default held-out view is interpolated.
  std::vector<int> order;
  for (int i = 0; i < views - 1; ++i) order.push_back(i);
  order.push_back(7);
  for (int idx : order) {
    CameraModel cam = ref;
    cam.translation = -Eigen::Vector3d(centers[idx][0], centers[idx][1], 0.0);
    spec.cameras.push_back(cam);
    spec.start_frames.push_back(starts[idx]);
  }
  spec.frame_count = frame_count;
  spec.fps = 25.0;
  spec.near = 1.0 / 0.9;
  spec.far = 5.0;
  spec.mpi_planes = 8;

  SyntheticPlane background;
  background.depth = 5.0;
  background.x0 = -1000;
  background.y0 = -1000;
  background.x1 = 1000;
  background.y1 = 1000;
  background.wavelength = 18.0;
  background.seed = 1;

  SyntheticPlane occluder;
  occluder.depth = 1.0 / 0.6;
  occluder.x0 = 14;
  occluder.y0 = 18;
  occluder.x1 = 62;
  occluder.y1 = 74;
  occluder.wavelength = 9.0;
  occluder.seed = 2;

  SyntheticPlane water;
  water.depth = 2.5;
  water.x0 = 88;
  water.y0 = 16;
  water.x1 = 148;
  water.y1 = 68;
  water.period = 6;
  water.amplitude = 0.3;
  water.wavelength = 12.0;
  water.seed = 3;

  spec.planes = {background, occluder, water};
  return spec;
}

}  // namespace mtvloop
