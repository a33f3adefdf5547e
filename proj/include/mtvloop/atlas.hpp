#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtvloop/mtv.hpp"

namespace mtvloop {

inline constexpr const char* kBundleFormat = "mtv-bundle/1";

// A trained MTV as texture atlases: one static RGBA atlas and T dynamic RGBA atlases
// sharing a slot layout, plus a self-contained JSON manifest.
struct AtlasBundle {
  Image<uint8_t> static_atlas;                // empty (0×0) when there are no static tiles
  std::vector<Image<uint8_t>> dynamic_atlas;  // T frames, empty when there are no loop tiles
  nlohmann::json manifest;
};

struct PackOptions {
  int max_dimension = 8192;
};

// Row-major shelf packing into the smallest power-of-two width W ≥ tile_size whose
// ceil(N / (W/tile_size))·tile_size rows fit within W.
AtlasBundle pack(const Mtv& mtv, const PackOptions& options = {});

// Rebuilds the Mtv from a bundle; validates version, rectangles and atlas sizes.
Mtv unpack(const AtlasBundle& bundle);

// dir/manifest.json, dir/static.png, dir/dyn_0000.png … (PNG files only for non-empty atlases).
void write_bundle(const std::filesystem::path& dir, const AtlasBundle& bundle);
AtlasBundle read_bundle(const std::filesystem::path& dir);

}  // namespace mtvloop
