#include "mlai/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlai/rng.hpp"
#include "mlai/wire.hpp"

namespace mlai {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

BoundingBox decode_box(const BoxPrediction& p) {
  BoundingBox b;
  b.cx = sigmoid(p.tx) + p.cell_x;
  b.cy = sigmoid(p.ty) + p.cell_y;
  b.w = p.prior_w * std::exp(p.tw);
  b.h = p.prior_h * std::exp(p.th);
  return b;
}

BoxPrediction encode_box(const BoundingBox& box, double cell_x, double cell_y,
                         double prior_w, double prior_h) {
  double ux = box.cx - cell_x;
  double uy = box.cy - cell_y;
  if (!(ux > 0.0 && ux < 1.0 && uy > 0.0 && uy < 1.0))
    throw OutOfCell("box center (" + std::to_string(box.cx) + ", " + std::to_string(box.cy) +
                    ") is not strictly inside cell (" + std::to_string(cell_x) + ", " +
                    std::to_string(cell_y) + ")");
  if (!(box.w > 0.0 && box.h > 0.0) || !(prior_w > 0.0 && prior_h > 0.0))
    throw std::invalid_argument("box and prior sizes must be positive");
  BoxPrediction p;
  p.cell_x = cell_x;
  p.cell_y = cell_y;
  p.prior_w = prior_w;
  p.prior_h = prior_h;
  p.tx = std::log(ux / (1.0 - ux));
  p.ty = std::log(uy / (1.0 - uy));
  p.tw = std::log(box.w / prior_w);
  p.th = std::log(box.h / prior_h);
  return p;
}

Eigen::Vector4d regression_gradient(const BoxPrediction& truth, const BoxPrediction& pred) {
  return {truth.tx - pred.tx, truth.ty - pred.ty, truth.tw - pred.tw, truth.th - pred.th};
}

Eigen::VectorXd class_probabilities(const Eigen::VectorXd& logits) {
  return logits.unaryExpr([](double v) { return sigmoid(v); });
}

double binary_cross_entropy(double predicted, int target) {
  if (target != 0 && target != 1) throw std::invalid_argument("target must be 0 or 1");
  constexpr double eps = 1e-12;
  double p = std::clamp(predicted, eps, 1.0 - eps);
  return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<Detection> scripted_detect(const SceneState& scene, SensorId sensor,
                                       const NoiseConfig& noise, std::uint64_t seed) {
  const SceneSensor* view = nullptr;
  for (const auto& s : scene.sensors)
    if (s.id == sensor) view = &s;
  if (!view) throw UnknownSensor("sensor " + std::to_string(sensor) + " not in scene");

  Rng rng(hash_mix(seed, sensor));
  std::vector<Detection> out;
  for (const auto& t : scene.targets) {
    if (!view->fov.contains(t.box.cx, t.box.cy)) continue;
    if (noise.miss_rate > 0.0 && rng.chance(noise.miss_rate)) continue;
    Detection d;
    d.box.cx = t.box.cx - view->fov.x + rng.gauss(0.0, noise.pos_sigma);
    d.box.cy = t.box.cy - view->fov.y + rng.gauss(0.0, noise.pos_sigma);
    d.box.w = std::max(1.0, t.box.w + rng.gauss(0.0, noise.size_sigma));
    d.box.h = std::max(1.0, t.box.h + rng.gauss(0.0, noise.size_sigma));
    d.objectness = std::clamp(0.95 + rng.gauss(0.0, noise.objectness_sigma), 0.05, 1.0);
    d.label = t.label;
    d.truth_id = t.id;
    out.push_back(std::move(d));
  }
  if (noise.false_positive_rate > 0.0 && rng.chance(noise.false_positive_rate)) {
    Detection d;
    d.box.cx = rng.uniform(0.0, view->fov.w);
    d.box.cy = rng.uniform(0.0, view->fov.h);
    d.box.w = rng.uniform(8.0, 32.0);
    d.box.h = rng.uniform(8.0, 32.0);
    d.objectness = rng.uniform(0.5, 0.9);
    d.label = 0;
    d.truth_id = -1;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::uint8_t> serialize_detections(std::span<const Detection> dets) {
  if (dets.size() > 0xFFFF) throw std::invalid_argument("too many detections for one record");
  std::vector<std::uint8_t> out;
  out.reserve(2 + dets.size() * 42);
  wire::put_u16(out, std::uint16_t(dets.size()));
  for (const auto& d : dets) {
    wire::put_u16(out, std::uint16_t(d.label));
    wire::put_f64(out, d.objectness);
    wire::put_f64(out, d.box.cx);
    wire::put_f64(out, d.box.cy);
    wire::put_f64(out, d.box.w);
    wire::put_f64(out, d.box.h);
  }
  return out;
}

std::vector<Detection> parse_detections(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  std::uint16_t count = r.u16();
  std::vector<Detection> out;
  out.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    Detection d;
    d.label = r.u16();
    d.objectness = r.f64();
    d.box.cx = r.f64();
    d.box.cy = r.f64();
    d.box.w = r.f64();
    d.box.h = r.f64();
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace mlai
