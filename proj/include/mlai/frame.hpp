#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mlai {

enum class PixelFormat : std::uint8_t {
  Rgb8 = 0,   // 3 channels, R G B interleaved
  Gray8 = 1,  // 1 channel
};

inline int channels_for(PixelFormat f) { return f == PixelFormat::Rgb8 ? 3 : 1; }

// raw raster image: row-major, channels interleaved, origin top-left
struct Frame {
  int width = 0;
  int height = 0;
  PixelFormat format = PixelFormat::Gray8;
  std::vector<std::uint8_t> pixels;

  static Frame rgb(int w, int h) {
    Frame f;
    f.width = w;
    f.height = h;
    f.format = PixelFormat::Rgb8;
    f.pixels.assign(std::size_t(w) * h * 3, 0);
    return f;
  }

  static Frame gray(int w, int h) {
    Frame f;
    f.width = w;
    f.height = h;
    f.format = PixelFormat::Gray8;
    f.pixels.assign(std::size_t(w) * h, 0);
    return f;
  }

  int channels() const { return channels_for(format); }

  std::size_t index(int x, int y, int c = 0) const {
    return (std::size_t(y) * width + x) * channels() + c;
  }

  std::uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }

  bool valid() const {
    return width > 0 && height > 0 &&
           pixels.size() == std::size_t(width) * height * channels();
  }

  bool operator==(const Frame&) const = default;
};

}  // namespace mlai
