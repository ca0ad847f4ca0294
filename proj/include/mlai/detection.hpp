#pragma once

// detection-head math and the scripted detector.
//
// box coordinates follow the usual grid parameterization: a prediction
// (tx, ty, tw, th) relative to a cell corner (cell_x, cell_y) and a prior
// (prior_w, prior_h) decodes to a center-based box
//   cx = sigmoid(tx) + cell_x      w = prior_w * exp(tw)
//   cy = sigmoid(ty) + cell_y      h = prior_h * exp(th)
// class scores are independent logistics, not a softmax.
//
// the scripted detector stands in for the network: it reads ground truth from
// a scene description and perturbs it with seeded noise, so the rest of the
// pipeline can be exercised deterministically.

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlai/box.hpp"
#include "mlai/types.hpp"

namespace mlai {

struct OutOfCell : std::runtime_error {
  explicit OutOfCell(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownSensor : std::runtime_error {
  explicit UnknownSensor(const std::string& what) : std::runtime_error(what) {}
};

double sigmoid(double v);

struct BoxPrediction {
  double tx = 0.0, ty = 0.0, tw = 0.0, th = 0.0;
  double cell_x = 0.0, cell_y = 0.0;
  double prior_w = 1.0, prior_h = 1.0;
};

BoundingBox decode_box(const BoxPrediction& p);

// inverse transform; throws OutOfCell unless the center lies strictly inside
// the unit cell (the sigmoid never reaches 0 or 1)
BoxPrediction encode_box(const BoundingBox& box, double cell_x, double cell_y,
                         double prior_w, double prior_h);

// gradient of the squared regression loss wrt the raw prediction, evaluated
// in t-space: component-wise (t_hat - t) for (x, y, w, h)
Eigen::Vector4d regression_gradient(const BoxPrediction& truth, const BoxPrediction& pred);

// independent per-class logistic scores
Eigen::VectorXd class_probabilities(const Eigen::VectorXd& logits);

// binary cross entropy with predictions clamped to [eps, 1-eps], eps = 1e-12
double binary_cross_entropy(double predicted, int target);

struct Detection {
  BoundingBox box;  // sensor-local pixels
  double objectness = 0.0;
  int label = 0;
  Eigen::VectorXd class_probs;  // empty when decoded from the wire
  int truth_id = -1;            // simulator annotation, never serialized
};

struct NoiseConfig {
  double pos_sigma = 0.0;
  double size_sigma = 0.0;
  double miss_rate = 0.0;
  double false_positive_rate = 0.0;
  double objectness_sigma = 0.0;
};

struct SceneSensor {
  SensorId id = 0;
  RectF fov;  // world pixels
};

struct SceneTarget {
  int id = 0;
  BoundingBox box;  // world pixels
  int label = 0;
};

struct SceneState {
  std::vector<SceneSensor> sensors;
  std::vector<SceneTarget> targets;
};

// deterministic for a given (scene, sensor, noise, seed); targets whose
// centers fall inside the sensor's field of view come back in sensor-local
// coordinates, jittered per the noise config. throws UnknownSensor.
std::vector<Detection> scripted_detect(const SceneState& scene, SensorId sensor,
                                       const NoiseConfig& noise, std::uint64_t seed);

// wire layout: count u16, then per record label u16 | objectness f64 |
// cx, cy, w, h as f64, all big-endian
std::vector<std::uint8_t> serialize_detections(std::span<const Detection> dets);
std::vector<Detection> parse_detections(std::span<const std::uint8_t> bytes);

}  // namespace mlai
