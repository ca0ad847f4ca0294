#include "mlai/detection.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

#include "mlai/rng.hpp"

namespace {

using namespace mlai;

SceneState demo_scene() {
  SceneState scene;
  scene.sensors.push_back({0, {0.0, 0.0, 192.0, 144.0}});
  scene.sensors.push_back({1, {260.0, 0.0, 192.0, 144.0}});
  scene.targets.push_back({7, {80.0, 70.0, 20.0, 36.0}, 0});
  scene.targets.push_back({8, {265.0, 10.0, 24.0, 24.0}, 2});
  return scene;
}

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("sigmoid pinned values and symmetry") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(sigmoid(-40.0) > 0.0);
  // exp(-20) is still representable next to 1; at 40 the sum rounds to 1.0
  CHECK(sigmoid(20.0) < 1.0);
  CHECK(sigmoid(40.0) <= 1.0);

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    double x = rng.uniform(-10.0, 10.0);
    CHECK(sigmoid(-x) == doctest::Approx(1.0 - sigmoid(x)).epsilon(1e-12));
  }
}

TEST_CASE("decode_box pinned value") {
  BoxPrediction p{1.0, -1.0, 0.5, -0.5, 2.0, 3.0, 2.0, 4.0};
  BoundingBox b = decode_box(p);
  CHECK(b.cx == doctest::Approx(2.731058578630005).epsilon(1e-12));
  CHECK(b.cy == doctest::Approx(3.268941421369995).epsilon(1e-12));
  CHECK(b.w == doctest::Approx(3.297442541400256).epsilon(1e-12));
  CHECK(b.h == doctest::Approx(2.426122638850534).epsilon(1e-12));
}

TEST_CASE("encode_box inverts decode_box") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    BoxPrediction t;
    t.tx = rng.uniform(-4.0, 4.0);
    t.ty = rng.uniform(-4.0, 4.0);
    t.tw = rng.uniform(-2.0, 2.0);
    t.th = rng.uniform(-2.0, 2.0);
    t.cell_x = rng.uniform(-8.0, 8.0);
    t.cell_y = rng.uniform(-8.0, 8.0);
    t.prior_w = rng.uniform(0.5, 6.0);
    t.prior_h = rng.uniform(0.5, 6.0);
    BoxPrediction back = encode_box(decode_box(t), t.cell_x, t.cell_y, t.prior_w, t.prior_h);
    CHECK(std::abs(back.tx - t.tx) < 1e-9);
    CHECK(std::abs(back.ty - t.ty) < 1e-9);
    CHECK(std::abs(back.tw - t.tw) < 1e-9);
    CHECK(std::abs(back.th - t.th) < 1e-9);
  }
}

TEST_CASE("encode_box rejects centers outside the open cell") {
  BoundingBox on_corner{2.0, 2.5, 1.0, 1.0};
  CHECK_THROWS_AS(encode_box(on_corner, 2.0, 2.0, 1.0, 1.0), OutOfCell);

  BoundingBox outside{3.5, 2.5, 1.0, 1.0};
  CHECK_THROWS_AS(encode_box(outside, 2.0, 2.0, 1.0, 1.0), OutOfCell);

  BoundingBox flat{2.5, 2.5, 0.0, 1.0};
  CHECK_THROWS_AS(encode_box(flat, 2.0, 2.0, 1.0, 1.0), std::invalid_argument);
  BoundingBox fine{2.5, 2.5, 1.0, 1.0};
  CHECK_THROWS_AS(encode_box(fine, 2.0, 2.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("regression gradient vanishes at a perfect prediction") {
  BoxPrediction t{0.3, -0.7, 0.2, 0.9, 1.0, 1.0, 2.0, 2.0};
  CHECK(regression_gradient(t, t).norm() == 0.0);

  BoxPrediction pred = t;
  pred.tx = 0.1;
  pred.th = 1.4;
  Eigen::Vector4d g = regression_gradient(t, pred);
  CHECK(g[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK(g[3] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("class probabilities are independent logistics, not a softmax") {
  Eigen::VectorXd logits(3);
  logits << 0.0, 1.0, -1.0;
  Eigen::VectorXd p = class_probabilities(logits);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK(p.sum() != doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("binary cross entropy pinned values and guards") {
  CHECK(binary_cross_entropy(0.9, 0) == doctest::Approx(2.302585092994045).epsilon(1e-12));
  CHECK(binary_cross_entropy(0.5, 1) == doctest::Approx(0.693147180559945).epsilon(1e-12));
  // the clamp holds a hit at 1.0 an epsilon away from a perfect score
  CHECK(binary_cross_entropy(1.0, 1) > 0.0);
  CHECK(binary_cross_entropy(1.0, 1) < 2e-12);
  CHECK_THROWS_AS(binary_cross_entropy(0.5, 2), std::invalid_argument);

  // the clamp keeps confident mistakes finite
  double worst = binary_cross_entropy(0.0, 1);
  CHECK(std::isfinite(worst));
  CHECK(worst == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
}

TEST_CASE("scripted detector is deterministic and sensor-local") {
  SceneState scene = demo_scene();
  NoiseConfig quiet;

  auto a = scripted_detect(scene, 0, quiet, 1234);
  auto b = scripted_detect(scene, 0, quiet, 1234);
  REQUIRE(a.size() == 1);  // only target 7 sits inside sensor 0's view
  CHECK(a[0].truth_id == 7);
  CHECK(a[0].box.cx == b[0].box.cx);
  CHECK(a[0].box.cy == b[0].box.cy);

  // noiseless output is the truth box shifted into sensor coordinates
  CHECK(a[0].box.cx == 80.0);
  CHECK(a[0].box.cy == 70.0);
  CHECK(a[0].box.w == 20.0);

  auto remote = scripted_detect(scene, 1, quiet, 1234);
  REQUIRE(remote.size() == 1);
  CHECK(remote[0].truth_id == 8);
  CHECK(remote[0].box.cx == 5.0);  // world 265 minus fov origin 260
  CHECK(remote[0].box.cy == 10.0);
  CHECK(remote[0].label == 2);

  CHECK_THROWS_AS(scripted_detect(scene, 9, quiet, 1234), UnknownSensor);
}

TEST_CASE("scripted detector honors miss and false-positive rates") {
  SceneState scene = demo_scene();

  NoiseConfig all_missed;
  all_missed.miss_rate = 1.0;
  CHECK(scripted_detect(scene, 0, all_missed, 5).empty());

  NoiseConfig with_fp;
  with_fp.false_positive_rate = 1.0;
  auto dets = scripted_detect(scene, 0, with_fp, 5);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].truth_id == 7);
  CHECK(dets[1].truth_id == -1);
  CHECK(dets[1].label == 0);
  CHECK(dets[1].objectness >= 0.5);
  CHECK(dets[1].objectness <= 0.9);
  CHECK(dets[1].box.cx >= 0.0);
  CHECK(dets[1].box.cx <= scene.sensors[0].fov.w);

  // position jitter moves the box, determinism still holds per seed
  NoiseConfig jitter;
  jitter.pos_sigma = 2.0;
  auto j1 = scripted_detect(scene, 0, jitter, 77);
  auto j2 = scripted_detect(scene, 0, jitter, 77);
  auto j3 = scripted_detect(scene, 0, jitter, 78);
  REQUIRE(j1.size() == 1);
  CHECK(j1[0].box.cx == j2[0].box.cx);
  CHECK(j1[0].box.cx != j3[0].box.cx);
  CHECK(j1[0].box.cx != 80.0);
}

TEST_CASE("detection records roundtrip except simulator annotations") {
  std::vector<Detection> dets(2);
  dets[0].box = {12.25, 40.5, 20.0, 36.0};
  dets[0].objectness = 0.875;
  dets[0].label = 3;
  dets[0].truth_id = 42;
  dets[0].class_probs = Eigen::VectorXd::Ones(4);
  dets[1].box = {-5.5, 0.0, 1.0, 2.0};
  dets[1].objectness = 1.0;
  dets[1].label = 0;

  auto bytes = serialize_detections(dets);
  CHECK(bytes.size() == 2 + 2 * (2 + 5 * 8));

  auto back = parse_detections(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[0].box.cx == 12.25);
  CHECK(back[0].box.h == 36.0);
  CHECK(back[0].objectness == 0.875);
  CHECK(back[0].label == 3);
  CHECK(back[0].truth_id == -1);        // never serialized
  CHECK(back[0].class_probs.size() == 0);  // wire records carry no class scores
  CHECK(back[1].box.cx == -5.5);

  CHECK(parse_detections(serialize_detections({})).empty());
}

}  // TEST_SUITE
