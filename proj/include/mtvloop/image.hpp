#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "mtvloop/error.hpp"

namespace mtvloop {

// Dense row-major h×w×c raster with interleaved channels.
template <class T>
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, T fill = T(0))
      : h_(height), w_(width), c_(channels), data_(size_t(height) * width * channels, fill) {
    MTV_REQUIRE(height >= 0 && width >= 0 && channels > 0, "invalid image dimensions");
  }

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  size_t size() const { return data_.size(); }
  size_t pixel_count() const { return size_t(h_) * w_; }
  bool empty() const { return data_.empty(); }

  size_t index(int y, int x, int ch = 0) const { return (size_t(y) * w_ + x) * c_ + ch; }
  T& operator()(int y, int x, int ch = 0) { return data_[index(y, x, ch)]; }
  const T& operator()(int y, int x, int ch = 0) const { return data_[index(y, x, ch)]; }

  T* pixel(int y, int x) { return data_.data() + index(y, x); }
  const T* pixel(int y, int x) const { return data_.data() + index(y, x); }

  bool same_shape(const Image& o) const { return h_ == o.h_ && w_ == o.w_ && c_ == o.c_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Copy of the sub-rectangle [y0, y0+hh) × [x0, x0+ww); out-of-range texels read as zero.
  Image crop(int y0, int x0, int hh, int ww) const {
    Image out(hh, ww, c_);
    for (int y = 0; y < hh; ++y) {
      int sy = y0 + y;
      if (sy < 0 || sy >= h_) continue;
      for (int x = 0; x < ww; ++x) {
        int sx = x0 + x;
        if (sx < 0 || sx >= w_) continue;
        std::copy_n(pixel(sy, sx), c_, out.pixel(y, x));
      }
    }
    return out;
  }

  // Pastes `src` with its top-left corner at (y0, x0); clipped to bounds.
  void paste(const Image& src, int y0, int x0) {
    MTV_REQUIRE(src.c_ == c_, "paste: channel mismatch");
    for (int y = 0; y < src.h_; ++y) {
      int dy = y0 + y;
      if (dy < 0 || dy >= h_) continue;
      for (int x = 0; x < src.w_; ++x) {
        int dx = x0 + x;
        if (dx < 0 || dx >= w_) continue;
        std::copy_n(src.pixel(y, x), c_, pixel(dy, dx));
      }
    }
  }

  // Single-channel copy of channel `ch`.
  Image channel(int ch) const {
    Image out(h_, w_, 1);
    for (size_t i = 0; i < pixel_count(); ++i) out.data_[i] = data_[i * c_ + ch];
    return out;
  }

  template <class U>
  Image<U> cast() const {
    Image<U> out(h_, w_, c_);
    std::transform(data_.begin(), data_.end(), out.storage().begin(), [](T v) { return U(v); });
    return out;
  }

  bool operator==(const Image& o) const = default;

 private:
  int h_ = 0, w_ = 0, c_ = 1;
  std::vector<T> data_;
};

using ImageD = Image<double>;
using ImageF = Image<float>;

// F frames sharing one shape.
using Video = std::vector<ImageD>;

inline Video crop_video(const Video& v, int y0, int x0, int h, int w) {
  Video out;
  out.reserve(v.size());
  for (const auto& f : v) out.push_back(f.crop(y0, x0, h, w));
  return out;
}

}  // namespace mtvloop
