#include "mtvloop/atlas.hpp"

#include <cstdio>
#include <fstream>

#include "mtvloop/camera.hpp"
#include "mtvloop/png_io.hpp"

namespace mtvloop {

namespace {

struct Layout {
  int width = 0, height = 0, cols = 0;
};

Layout shelf_layout(size_t count, int ts, int max_dim) {
  Layout l;
  if (count == 0) return l;
  int w = 1;
  while (w < ts) w *= 2;
  while (true) {
    const int cols = w / ts;
    const size_t rows = (count + cols - 1) / cols;
    if (rows * size_t(ts) <= size_t(w)) {
      l.width = w;
      l.cols = cols;
      l.height = int(rows) * ts;
      break;
    }
    w *= 2;
  }
  if (l.width > max_dim || l.height > max_dim)
    throw DataError("atlas: " + std::to_string(count) + " tiles need a " + std::to_string(l.width) + "x" +
                    std::to_string(l.height) + " atlas, above the maximum dimension " + std::to_string(max_dim));
  return l;
}

void blit(Image<uint8_t>& atlas, const Image<double>& patch, int x0, int y0) {
  atlas.paste(quantize_u8(patch), y0, x0);
}

TileLabel label_from(const std::string& s) {
  if (s == "static") return TileLabel::static_;
  if (s == "loop") return TileLabel::loop;
  if (s == "empty") return TileLabel::empty;
  throw DataError("bundle: unknown tile label '" + s + "'");
}

}  // namespace

AtlasBundle pack(const Mtv& mtv, const PackOptions& options) {
  mtv.validate();
  const int ts = mtv.tile_size;
  const Layout sl = shelf_layout(mtv.static_tile_count(), ts, options.max_dimension);
  const Layout dl = shelf_layout(mtv.loop_tile_count(), ts, options.max_dimension);

  AtlasBundle b;
  if (sl.width > 0) b.static_atlas = Image<uint8_t>(sl.height, sl.width, 4);
  if (dl.width > 0)
    for (int t = 0; t < mtv.frame_count; ++t) b.dynamic_atlas.emplace_back(dl.height, dl.width, 4);

  nlohmann::json tiles = nlohmann::json::array();
  size_t si = 0, di = 0;
  for (const Tile& tile : mtv.tiles) {
    nlohmann::json rec = {{"plane", tile.plane}, {"row", tile.row}, {"col", tile.col}, {"label", to_string(tile.label)}};
    if (tile.label == TileLabel::static_) {
      const int x = int(si % sl.cols) * ts, y = int(si / sl.cols) * ts;
      blit(b.static_atlas, tile.static_patch, x, y);
      rec["atlas"] = "static";
      rec["rect"] = {x, y, ts, ts};
      ++si;
    } else if (tile.label == TileLabel::loop) {
      const int x = int(di % dl.cols) * ts, y = int(di / dl.cols) * ts;
      for (int t = 0; t < mtv.frame_count; ++t) blit(b.dynamic_atlas[t], tile.loop_patch[t], x, y);
      rec["atlas"] = "dynamic";
      rec["rect"] = {x, y, ts, ts};
      ++di;
    }
    tiles.push_back(std::move(rec));
  }

  nlohmann::json dyn_files = nlohmann::json::array();
  for (size_t t = 0; t < b.dynamic_atlas.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "dyn_%04zu.png", t);
    dyn_files.push_back(name);
  }
  b.manifest = {
      {"format", kBundleFormat},
      {"camera", camera_to_json(mtv.stack.reference)},
      {"depths", mtv.stack.depths},
      {"tile_size", ts},
      {"frame_count", mtv.frame_count},
      {"grid", {{"planes", mtv.stack.size()}, {"rows", mtv.grid_rows}, {"cols", mtv.grid_cols}}},
      {"static_atlas", {{"file", sl.width > 0 ? "static.png" : ""}, {"width", sl.width}, {"height", sl.height}}},
      {"dynamic_atlas", {{"files", dyn_files}, {"width", dl.width}, {"height", dl.height}}},
      {"tiles", tiles},
  };
  return b;
}

Mtv unpack(const AtlasBundle& bundle) {
  const nlohmann::json& m = bundle.manifest;
  try {
    MTV_REQUIRE(m.is_object() && m.value("format", "") == kBundleFormat,
                "bundle: unsupported manifest format '" + (m.is_object() ? m.value("format", "") : "") + "'");
    Mtv mtv;
    mtv.stack.reference = camera_from_json(m.at("camera"));
    mtv.stack.depths = m.at("depths").get<std::vector<double>>();
    mtv.tile_size = m.at("tile_size").get<int>();
    mtv.frame_count = m.at("frame_count").get<int>();
    mtv.grid_rows = m.at("grid").at("rows").get<int>();
    mtv.grid_cols = m.at("grid").at("cols").get<int>();
    MTV_REQUIRE(m.at("grid").at("planes").get<int>() == int(mtv.stack.depths.size()), "bundle: plane count mismatch");
    mtv.stack.validate();
    const int ts = mtv.tile_size;
    MTV_REQUIRE(ts > 0 && mtv.frame_count > 0, "bundle: invalid tile size or frame count");

    auto check_atlas = [](const Image<uint8_t>& img, const nlohmann::json& spec, const char* what) {
      const int w = spec.at("width").get<int>(), h = spec.at("height").get<int>();
      if (w == 0 && h == 0) return;
      MTV_REQUIRE(img.width() == w && img.height() == h && img.channels() == 4,
                  std::string("bundle: ") + what + " atlas does not match the manifest size");
    };
    check_atlas(bundle.static_atlas, m.at("static_atlas"), "static");
    const nlohmann::json& dyn = m.at("dynamic_atlas");
    const bool has_dyn = dyn.at("width").get<int>() > 0;
    if (has_dyn) {
      MTV_REQUIRE(int(bundle.dynamic_atlas.size()) == mtv.frame_count, "bundle: dynamic atlas frame count mismatch");
      for (const auto& f : bundle.dynamic_atlas) check_atlas(f, dyn, "dynamic");
    }

    std::vector<char> used_static(bundle.static_atlas.pixel_count(), 0);
    std::vector<char> used_dyn(has_dyn ? bundle.dynamic_atlas.front().pixel_count() : 0, 0);
    for (const auto& rec : m.at("tiles")) {
      Tile tile;
      tile.plane = rec.at("plane").get<int>();
      tile.row = rec.at("row").get<int>();
      tile.col = rec.at("col").get<int>();
      tile.label = label_from(rec.at("label").get<std::string>());
      if (tile.label != TileLabel::empty) {
        const auto rect = rec.at("rect").get<std::vector<int>>();
        MTV_REQUIRE(rect.size() == 4 && rect[2] == ts && rect[3] == ts, "bundle: tile rect must be tile_size square");
        const bool is_static = tile.label == TileLabel::static_;
        MTV_REQUIRE(rec.at("atlas").get<std::string>() == (is_static ? "static" : "dynamic"),
                    "bundle: tile atlas does not match its label");
        const Image<uint8_t>& atlas = is_static ? bundle.static_atlas : bundle.dynamic_atlas.at(0);
        const int x = rect[0], y = rect[1];
        MTV_REQUIRE(x >= 0 && y >= 0 && x + ts <= atlas.width() && y + ts <= atlas.height(),
                    "bundle: tile rect outside the atlas");
        auto& used = is_static ? used_static : used_dyn;
        for (int yy = y; yy < y + ts; ++yy)
          for (int xx = x; xx < x + ts; ++xx) {
            char& u = used[size_t(yy) * atlas.width() + xx];
            MTV_REQUIRE(!u, "bundle: overlapping tile rects");
            u = 1;
          }
        if (is_static) {
          tile.static_patch = dequantize_u8(bundle.static_atlas.crop(y, x, ts, ts));
        } else {
          for (const auto& f : bundle.dynamic_atlas) tile.loop_patch.push_back(dequantize_u8(f.crop(y, x, ts, ts)));
        }
      }
      mtv.tiles.push_back(std::move(tile));
    }
    mtv.validate();
    return mtv;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bundle: malformed manifest: ") + e.what());
  }
}

void write_bundle(const std::filesystem::path& dir, const AtlasBundle& bundle) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.json");
    MTV_REQUIRE(out.good(), "bundle: cannot write " + (dir / "manifest.json").string());
    out << bundle.manifest.dump(2) << '\n';
  }
  if (!bundle.static_atlas.empty()) write_png(dir / "static.png", bundle.static_atlas);
  const auto& files = bundle.manifest.at("dynamic_atlas").at("files");
  for (size_t t = 0; t < bundle.dynamic_atlas.size(); ++t)
    write_png(dir / files.at(t).get<std::string>(), bundle.dynamic_atlas[t]);
}

AtlasBundle read_bundle(const std::filesystem::path& dir) {
  AtlasBundle b;
  std::ifstream in(dir / "manifest.json");
  MTV_REQUIRE(in.good(), "bundle: missing " + (dir / "manifest.json").string());
  try {
    b.manifest = nlohmann::json::parse(in);
    MTV_REQUIRE(b.manifest.value("format", "") == kBundleFormat, "bundle: unsupported manifest format");
    const auto& st = b.manifest.at("static_atlas");
    if (st.at("width").get<int>() > 0) b.static_atlas = read_png(dir / st.at("file").get<std::string>(), 4);
    for (const auto& f : b.manifest.at("dynamic_atlas").at("files"))
      b.dynamic_atlas.push_back(read_png(dir / f.get<std::string>(), 4));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bundle: malformed manifest: ") + e.what());
  }
  return b;
}

}  // namespace mtvloop
