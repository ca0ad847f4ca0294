#include "mlai/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "mlai/wire.hpp"

namespace mlai {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'M', 'L', 'F', '1'};

// refuse to allocate for headers claiming more than 1 GiB of pixel data
constexpr std::uint64_t kMaxPixelBytes = 1ULL << 30;

PixelFormat format_from_model(std::uint8_t model) {
  switch (model) {
    case 0x00: return PixelFormat::Rgb8;
    case 0x01: return PixelFormat::Gray8;
    default: throw MalformedHeader("unknown color model byte " + std::to_string(model));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (!frame.valid()) throw LengthMismatch("frame pixel buffer does not match its dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(14 + frame.pixels.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  wire::put_u32(out, std::uint32_t(frame.width));
  wire::put_u32(out, std::uint32_t(frame.height));
  wire::put_u8(out, std::uint8_t(frame.channels()));
  wire::put_u8(out, std::uint8_t(frame.format));
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 14) throw MalformedHeader("truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw MalformedHeader("bad magic");
  wire::Reader r(bytes.subspan(4));
  std::uint32_t w = r.u32();
  std::uint32_t h = r.u32();
  std::uint8_t channels = r.u8();
  PixelFormat format = format_from_model(r.u8());
  if (w == 0 || h == 0) throw MalformedHeader("zero dimension");
  if (channels != channels_for(format))
    throw MalformedHeader("channel count does not match color model");
  std::uint64_t expect = std::uint64_t(w) * h * channels;
  if (expect > kMaxPixelBytes) throw MalformedHeader("implausible dimensions");
  if (r.remaining() != expect)
    throw LengthMismatch("payload holds " + std::to_string(r.remaining()) +
                         " bytes, header implies " + std::to_string(expect));
  Frame f;
  f.width = int(w);
  f.height = int(h);
  f.format = format;
  auto body = r.bytes(std::size_t(expect));
  f.pixels.assign(body.begin(), body.end());
  return f;
}

HsvPixel rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  double r = r8, g = g8, b = b8;
  double hi = std::max({r, g, b});
  double lo = std::min({r, g, b});
  double chroma = hi - lo;
  HsvPixel p;
  p.v = hi / 255.0;
  p.s = hi > 0.0 ? chroma / hi : 0.0;
  if (chroma > 0.0) {
    if (hi == r) {
      p.h = 60.0 * (g - b) / chroma;
      if (p.h < 0.0) p.h += 360.0;
    } else if (hi == g) {
      p.h = 60.0 * ((b - r) / chroma + 2.0);
    } else {
      p.h = 60.0 * ((r - g) / chroma + 4.0);
    }
    if (p.h >= 360.0) p.h -= 360.0;
  }
  return p;
}

namespace {

// sRGB -> XYZ, derived from the sRGB primary chromaticities and D65 white.
// the Lab reference white is the row sums of this matrix so that pure white
// maps to exactly L=100, a=0, b=0 and neutral grays to a=b=0.
constexpr double kRgb2Xyz[3][3] = {
    {0.41239079926595934, 0.357584339383878, 0.1804807884018343},
    {0.21263900587151027, 0.715168678767756, 0.07219231536073371},
    {0.01933081871559182, 0.11919477979462598, 0.9505321522496607},
};

struct SrgbLut {
  double v[256];
  SrgbLut() {
    for (int i = 0; i < 256; ++i) {
      double u = i / 255.0;
      v[i] = u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
    }
  }
};

double srgb_to_linear(std::uint8_t c) {
  static const SrgbLut lut;
  return lut.v[c];
}

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  constexpr double d3 = d * d * d;
  return t > d3 ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

}  // namespace

LabPixel rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  double rl = srgb_to_linear(r8);
  double gl = srgb_to_linear(g8);
  double bl = srgb_to_linear(b8);
  double xyz[3];
  double white[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kRgb2Xyz[i][0] * rl + kRgb2Xyz[i][1] * gl + kRgb2Xyz[i][2] * bl;
    white[i] = kRgb2Xyz[i][0] + kRgb2Xyz[i][1] + kRgb2Xyz[i][2];
  }
  double fx = lab_f(xyz[0] / white[0]);
  double fy = lab_f(xyz[1] / white[1]);
  double fz = lab_f(xyz[2] / white[2]);
  LabPixel p;
  p.l = 116.0 * fy - 16.0;
  p.a = 500.0 * (fx - fy);
  p.b = 200.0 * (fy - fz);
  return p;
}

Frame to_gray(const Frame& frame) {
  if (frame.format == PixelFormat::Gray8) return frame;
  Frame g = Frame::gray(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      double luma = 0.299 * frame.at(x, y, 0) + 0.587 * frame.at(x, y, 1) +
                    0.114 * frame.at(x, y, 2);
      g.at(x, y) = std::uint8_t(std::lround(std::clamp(luma, 0.0, 255.0)));
    }
  }
  return g;
}

Frame crop(const Frame& frame, const BoundingBox& box) {
  int x0 = std::max(0, int(std::floor(box.left())));
  int y0 = std::max(0, int(std::floor(box.top())));
  int x1 = std::min(frame.width, int(std::ceil(box.right())));
  int y1 = std::min(frame.height, int(std::ceil(box.bottom())));
  if (x1 <= x0 || y1 <= y0) throw EmptyIntersection{};
  Frame out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.format = frame.format;
  out.pixels.resize(std::size_t(out.width) * out.height * out.channels());
  int c = frame.channels();
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* src = frame.pixels.data() + frame.index(x0, y);
    std::uint8_t* dst = out.pixels.data() + out.index(0, y - y0);
    std::memcpy(dst, src, std::size_t(x1 - x0) * c);
  }
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

// netpbm header token reader: skips whitespace and # comments
int pnm_int(const std::vector<std::uint8_t>& data, std::size_t& pos) {
  while (pos < data.size()) {
    std::uint8_t c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= data.size() || !std::isdigit(data[pos]))
    throw std::runtime_error("malformed netpbm header");
  int v = 0;
  while (pos < data.size() && std::isdigit(data[pos])) {
    v = v * 10 + (data[pos] - '0');
    ++pos;
  }
  return v;
}

Frame load_pnm(const std::vector<std::uint8_t>& data) {
  bool color = data[1] == '6';
  std::size_t pos = 2;
  int w = pnm_int(data, pos);
  int h = pnm_int(data, pos);
  int maxval = pnm_int(data, pos);
  if (w <= 0 || h <= 0) throw std::runtime_error("bad netpbm dimensions");
  if (maxval != 255) throw std::runtime_error("only 8-bit netpbm files are supported");
  ++pos;  // single whitespace byte after maxval
  std::size_t need = std::size_t(w) * h * (color ? 3 : 1);
  if (data.size() - pos < need) throw std::runtime_error("netpbm pixel data truncated");
  Frame f = color ? Frame::rgb(w, h) : Frame::gray(w, h);
  std::copy_n(data.begin() + std::ptrdiff_t(pos), need, f.pixels.begin());
  return f;
}

}  // namespace

Frame load_image(const std::filesystem::path& path) {
  auto data = read_file(path);
  if (data.size() >= 4 && std::equal(kMagic.begin(), kMagic.end(), data.begin()))
    return decode_frame(data);
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6'))
    return load_pnm(data);
  throw std::runtime_error("unrecognized image format in " + path.string());
}

void save_ppm(const Frame& frame, const std::filesystem::path& path) {
  const Frame& f = frame;
  std::string header = std::string(f.format == PixelFormat::Rgb8 ? "P6" : "P5") + "\n" +
                       std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  std::vector<std::uint8_t> data(header.begin(), header.end());
  data.insert(data.end(), f.pixels.begin(), f.pixels.end());
  write_file(path, data);
}

void save_mlf1(const Frame& frame, const std::filesystem::path& path) {
  write_file(path, encode_frame(frame));
}

void save_image(const Frame& frame, const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".mlf1") {
    save_mlf1(frame, path);
  } else if (ext == ".ppm") {
    if (frame.format == PixelFormat::Rgb8) {
      save_ppm(frame, path);
    } else {
      Frame rgb = Frame::rgb(frame.width, frame.height);
      for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        rgb.pixels[3 * i] = rgb.pixels[3 * i + 1] = rgb.pixels[3 * i + 2] = frame.pixels[i];
      }
      save_ppm(rgb, path);
    }
  } else if (ext == ".pgm") {
    save_ppm(to_gray(frame), path);
  } else {
    throw std::runtime_error("unsupported output extension " + ext);
  }
}

}  // namespace mlai
