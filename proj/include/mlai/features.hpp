#pragma once

// appearance descriptor: a pyramid of horizontal stripes, each summarized by
// hue, saturation, a*, and b* histograms, concatenated, power-normalized and
// L2-normalized. two descriptors are comparable only under the same config;
// the config id travels with the vector on the wire.

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlai/frame.hpp"

namespace mlai {

struct TooShort : std::runtime_error {
  explicit TooShort(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateFeature : std::runtime_error {
  DegenerateFeature() : std::runtime_error("feature vector has zero norm") {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigMismatch : std::runtime_error {
  explicit ConfigMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroVector : std::runtime_error {
  ZeroVector() : std::runtime_error("cosine of a zero vector is undefined") {}
};

struct FeatureConfig {
  std::vector<int> pyramid_stripes = {3, 5, 7};
  int bins_per_channel = 16;
  double power_exponent = 0.5;

  // total descriptor length: 4 histograms per stripe
  int dimension() const;

  // 16-bit fingerprint of the fields above; equal configs get equal ids
  std::uint16_t id() const;

  void validate() const;  // throws std::invalid_argument
};

struct FeatureVector {
  Eigen::VectorXd values;
  std::uint16_t config_id = 0;
};

// horizontal stripes with floor boundaries: stripe i covers rows
// [floor(i*H/n), floor((i+1)*H/n)). every row lands in exactly one stripe.
std::vector<Frame> split_stripes(const Frame& frame, int count);

struct ChannelHistograms {
  Eigen::VectorXd hue;  // [0, 360)
  Eigen::VectorXd sat;  // [0, 1]
  Eigen::VectorXd a;    // [-128, 128)
  Eigen::VectorXd b;    // [-128, 128)
};

// hard-assignment counts; out-of-range values clamp to the edge bins
ChannelHistograms stripe_histograms(const Frame& stripe, int bins);

FeatureVector extract_feature(const Frame& frame, const FeatureConfig& config = {});

double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

// wire layout: config id u16 | dimension u32 | values as f64, all big-endian
std::vector<std::uint8_t> serialize_feature(const FeatureVector& f);
FeatureVector parse_feature(std::span<const std::uint8_t> bytes, const FeatureConfig& expected);

}  // namespace mlai
