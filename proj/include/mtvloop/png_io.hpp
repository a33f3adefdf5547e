#pragma once

#include <cstdint>
#include <filesystem>

#include "mtvloop/image.hpp"

namespace mtvloop {

// 8-bit PNG with 1 (gray), 3 (RGB) or 4 (RGBA) channels; converts on read.
Image<uint8_t> read_png(const std::filesystem::path& path, int channels);
void write_png(const std::filesystem::path& path, const Image<uint8_t>& image);

// [0,1] ↔ 8-bit with round-to-nearest; out-of-range values are clamped.
Image<uint8_t> quantize_u8(const Image<double>& image);
Image<double> dequantize_u8(const Image<uint8_t>& image);

}  // namespace mtvloop
