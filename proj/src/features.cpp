#include "mlai/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlai/imaging.hpp"
#include "mlai/wire.hpp"

namespace mlai {

namespace {

int clamp_bin(double t, int bins) {
  int b = int(std::floor(t));
  return std::clamp(b, 0, bins - 1);
}

struct PixelBins {
  std::uint8_t hue, sat, a, b;
};

PixelBins bin_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b, int bins) {
  HsvPixel hsv = rgb_to_hsv(r, g, b);
  LabPixel lab = rgb_to_lab(r, g, b);
  PixelBins out;
  out.hue = std::uint8_t(clamp_bin(hsv.h / 360.0 * bins, bins));
  out.sat = std::uint8_t(clamp_bin(hsv.s * bins, bins));
  out.a = std::uint8_t(clamp_bin((lab.a + 128.0) / 256.0 * bins, bins));
  out.b = std::uint8_t(clamp_bin((lab.b + 128.0) / 256.0 * bins, bins));
  return out;
}

void fetch_rgb(const Frame& f, int x, int y, std::uint8_t& r, std::uint8_t& g,
               std::uint8_t& b) {
  if (f.format == PixelFormat::Rgb8) {
    r = f.at(x, y, 0);
    g = f.at(x, y, 1);
    b = f.at(x, y, 2);
  } else {
    r = g = b = f.at(x, y);
  }
}

}  // namespace

int FeatureConfig::dimension() const {
  int stripes = 0;
  for (int s : pyramid_stripes) stripes += s;
  return stripes * 4 * bins_per_channel;
}

std::uint16_t FeatureConfig::id() const {
  std::vector<std::uint8_t> bytes;
  for (int s : pyramid_stripes) wire::put_u32(bytes, std::uint32_t(s));
  wire::put_u32(bytes, std::uint32_t(bins_per_channel));
  wire::put_f64(bytes, power_exponent);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  h = h ^ (h >> 16) ^ (h >> 32) ^ (h >> 48);
  return std::uint16_t(h & 0xFFFF);
}

void FeatureConfig::validate() const {
  if (pyramid_stripes.empty()) throw std::invalid_argument("pyramid has no levels");
  for (int s : pyramid_stripes)
    if (s < 1) throw std::invalid_argument("stripe count must be positive");
  if (bins_per_channel < 1) throw std::invalid_argument("bins must be positive");
  if (!(power_exponent > 0.0)) throw std::invalid_argument("power exponent must be positive");
}

std::vector<Frame> split_stripes(const Frame& frame, int count) {
  if (count < 1) throw std::invalid_argument("stripe count must be positive");
  if (frame.height < count)
    throw TooShort("frame height " + std::to_string(frame.height) + " cannot hold " +
                   std::to_string(count) + " stripes");
  std::vector<Frame> out;
  out.reserve(std::size_t(count));
  int c = frame.channels();
  for (int i = 0; i < count; ++i) {
    int y0 = i * frame.height / count;
    int y1 = (i + 1) * frame.height / count;
    Frame s;
    s.width = frame.width;
    s.height = y1 - y0;
    s.format = frame.format;
    s.pixels.assign(frame.pixels.begin() + frame.index(0, y0),
                    frame.pixels.begin() + frame.index(0, y0) + std::size_t(y1 - y0) * frame.width * c);
    out.push_back(std::move(s));
  }
  return out;
}

ChannelHistograms stripe_histograms(const Frame& stripe, int bins) {
  ChannelHistograms h;
  h.hue = Eigen::VectorXd::Zero(bins);
  h.sat = Eigen::VectorXd::Zero(bins);
  h.a = Eigen::VectorXd::Zero(bins);
  h.b = Eigen::VectorXd::Zero(bins);
  for (int y = 0; y < stripe.height; ++y) {
    for (int x = 0; x < stripe.width; ++x) {
      std::uint8_t r, g, b;
      fetch_rgb(stripe, x, y, r, g, b);
      PixelBins pb = bin_pixel(r, g, b, bins);
      h.hue[pb.hue] += 1.0;
      h.sat[pb.sat] += 1.0;
      h.a[pb.a] += 1.0;
      h.b[pb.b] += 1.0;
    }
  }
  return h;
}

FeatureVector extract_feature(const Frame& frame, const FeatureConfig& config) {
  config.validate();
  int deepest = *std::max_element(config.pyramid_stripes.begin(), config.pyramid_stripes.end());
  if (frame.width < 1 || frame.height < deepest)
    throw TooShort("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                   " is too small for a " + std::to_string(deepest) + "-stripe level");

  // bin every pixel once; the pyramid levels then just re-partition rows
  int bins = config.bins_per_channel;
  std::vector<PixelBins> cells(std::size_t(frame.width) * frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      std::uint8_t r, g, b;
      fetch_rgb(frame, x, y, r, g, b);
      cells[std::size_t(y) * frame.width + x] = bin_pixel(r, g, b, bins);
    }
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(config.dimension());
  int offset = 0;
  for (int count : config.pyramid_stripes) {
    for (int i = 0; i < count; ++i) {
      int y0 = i * frame.height / count;
      int y1 = (i + 1) * frame.height / count;
      auto hue = v.segment(offset, bins);
      auto sat = v.segment(offset + bins, bins);
      auto la = v.segment(offset + 2 * bins, bins);
      auto lb = v.segment(offset + 3 * bins, bins);
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < frame.width; ++x) {
          const PixelBins& pb = cells[std::size_t(y) * frame.width + x];
          hue[pb.hue] += 1.0;
          sat[pb.sat] += 1.0;
          la[pb.a] += 1.0;
          lb[pb.b] += 1.0;
        }
      }
      offset += 4 * bins;
    }
  }

  // power normalization tames peaky histograms, then project to the unit sphere
  double alpha = config.power_exponent;
  v = v.unaryExpr([alpha](double x) {
    return x >= 0.0 ? std::pow(x, alpha) : -std::pow(-x, alpha);
  });
  double norm = v.norm();
  if (norm == 0.0) throw DegenerateFeature{};
  v /= norm;

  return FeatureVector{std::move(v), config.id()};
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.config_id != b.config_id)
    throw ConfigMismatch("comparing features from different configs");
  if (a.values.size() != b.values.size())
    throw DimensionMismatch("feature dimensions " + std::to_string(a.values.size()) + " vs " +
                            std::to_string(b.values.size()));
  double na = a.values.norm();
  double nb = b.values.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVector{};
  return a.values.dot(b.values) / (na * nb);
}

std::vector<std::uint8_t> serialize_feature(const FeatureVector& f) {
  std::vector<std::uint8_t> out;
  out.reserve(6 + std::size_t(f.values.size()) * 8);
  wire::put_u16(out, f.config_id);
  wire::put_u32(out, std::uint32_t(f.values.size()));
  for (Eigen::Index i = 0; i < f.values.size(); ++i) wire::put_f64(out, f.values[i]);
  return out;
}

FeatureVector parse_feature(std::span<const std::uint8_t> bytes, const FeatureConfig& expected) {
  try {
    wire::Reader r(bytes);
    std::uint16_t id = r.u16();
    if (id != expected.id())
      throw ConfigMismatch("feature config id " + std::to_string(id) + " does not match " +
                           std::to_string(expected.id()));
    std::uint32_t dim = r.u32();
    if (dim != std::uint32_t(expected.dimension()))
      throw DimensionMismatch("feature dimension " + std::to_string(dim) + ", expected " +
                              std::to_string(expected.dimension()));
    FeatureVector f;
    f.config_id = id;
    f.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) f.values[i] = r.f64();
    return f;
  } catch (const wire::ShortRead&) {
    throw TooShort("feature record truncated");
  }
}

}  // namespace mlai
