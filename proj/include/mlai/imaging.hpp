#pragma once

// lossless frame codec, color conversions, and crop.
//
// codec layout (all integers big-endian):
//   magic "MLF1" | width u32 | height u32 | channels u8 | color model u8 |
//   raw pixels, row-major, channels interleaved
// color model byte: 0x00 = RGB8 (channels 3), 0x01 = GRAY8 (channels 1).

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlai/box.hpp"
#include "mlai/frame.hpp"

namespace mlai {

struct MalformedHeader : std::runtime_error {
  explicit MalformedHeader(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : std::runtime_error {
  explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyIntersection : std::runtime_error {
  EmptyIntersection() : std::runtime_error("crop region does not intersect the frame") {}
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);
Frame decode_frame(std::span<const std::uint8_t> bytes);

struct HsvPixel {
  double h = 0.0;  // degrees in [0, 360); 0 for achromatic pixels
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

struct LabPixel {
  double l = 0.0;  // [0, 100]
  double a = 0.0;
  double b = 0.0;
};

HsvPixel rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
LabPixel rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// ITU-R BT.601 luma; identity on gray frames
Frame to_gray(const Frame& frame);

// pixel-cover crop: the result holds every pixel the box touches, clipped to
// the frame. throws EmptyIntersection when nothing remains.
Frame crop(const Frame& frame, const BoundingBox& box);

// file I/O used by the CLI: MLF1 plus binary PPM (P6) and PGM (P5)
Frame load_image(const std::filesystem::path& path);
void save_image(const Frame& frame, const std::filesystem::path& path);  // by extension
void save_ppm(const Frame& frame, const std::filesystem::path& path);
void save_mlf1(const Frame& frame, const std::filesystem::path& path);

}  // namespace mlai
