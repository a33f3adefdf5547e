#include "mtvloop/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace mtvloop {

namespace {

png_uint_32 format_for(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    case 4: return PNG_FORMAT_RGBA;
  }
  throw DataError("png: unsupported channel count " + std::to_string(channels));
}

}  // namespace

Image<uint8_t> read_png(const std::filesystem::path& path, int channels) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw DataError("png: cannot read " + path.string() + ": " + img.message);
  img.format = format_for(channels);
  Image<uint8_t> out(int(img.height), int(img.width), channels);
  if (!png_image_finish_read(&img, nullptr, out.storage().data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw DataError("png: cannot decode " + path.string() + ": " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image<uint8_t>& image) {
  MTV_REQUIRE(image.height() > 0 && image.width() > 0, "png: cannot write an empty image");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width());
  img.height = png_uint_32(image.height());
  img.format = format_for(image.channels());
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.storage().data(), 0, nullptr))
    throw DataError("png: cannot write " + path.string() + ": " + img.message);
}

Image<uint8_t> quantize_u8(const Image<double>& image) {
  Image<uint8_t> out(image.height(), image.width(), image.channels());
  std::transform(image.storage().begin(), image.storage().end(), out.storage().begin(),
                 [](double v) { return uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); });
  return out;
}

Image<double> dequantize_u8(const Image<uint8_t>& image) {
  Image<double> out(image.height(), image.width(), image.channels());
  std::transform(image.storage().begin(), image.storage().end(), out.storage().begin(),
                 [](uint8_t v) { return double(v) / 255.0; });
  return out;
}

}  // namespace mtvloop
