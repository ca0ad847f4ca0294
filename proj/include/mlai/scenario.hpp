#pragma once

// scenario files stage a deterministic multi-sensor episode: sensor fields of
// view over a shared world plane, procedurally textured targets moving along
// waypoint tracks, per-sensor illumination, noise knobs for the scripted
// detector, and the re-identification / handover parameters.
//
// the format is line-based: a directive word followed by key=value tokens
// (see docs/scenarios.md). '#' starts a comment.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlai/box.hpp"
#include "mlai/detection.hpp"
#include "mlai/geo.hpp"
#include "mlai/types.hpp"

namespace mlai {

struct ScenarioInvalid : std::runtime_error {
  explicit ScenarioInvalid(const std::string& what) : std::runtime_error(what) {}
};

enum class SensorRole { Tracking, Assistant };

enum class LinkKind { Wireless, Usb, Wifi, Hdmi };

// deterministic per-hop transfer delay, seconds
double link_latency_s(LinkKind k);

struct Illumination {
  double gain = 1.0;
  double offset = 0.0;
};

enum class PatternKind { Stripes, Checker, Solid };

struct PrototypeSpec {
  PatternKind pattern = PatternKind::Stripes;
  std::uint64_t seed = 0;
  std::array<std::uint8_t, 3> color1 = {200, 200, 200};
  std::array<std::uint8_t, 3> color2 = {60, 60, 60};
  int period = 8;  // pattern cell size, pixels
};

struct Waypoint {
  double frame = 0.0;
  double x = 0.0;  // world pixels
  double y = 0.0;
};

struct TargetSpec {
  int id = 0;
  int label = 0;
  double width = 24.0;
  double height = 48.0;
  PrototypeSpec proto;
  std::vector<Waypoint> waypoints;
};

struct SensorSpec {
  SensorId id = 0;
  SensorRole role = SensorRole::Assistant;
  RectF fov;  // world pixels
  GeoPoint anchor;
  double altitude = 30.0;
  Illumination illum;
};

struct LinkSpec {
  std::string from;
  std::string to;
  LinkKind kind = LinkKind::Wifi;
};

struct ReidParams {
  double threshold = 0.60;
  int k = 20;
};

struct SimParams {
  int lost_after = 3;      // consecutive missed frames before the target is lost
  int patience = 3;        // probe-silent frames before a handover decision
  int giveup = 30;         // probe-silent frames before a no-candidate ACK
  int min_receipts = 10;   // evidence needed before deciding
  int max_missed = 10;     // centroid tracker reap threshold
  double max_dist = 60.0;  // centroid tracker gate
  bool stream_frames = true;  // sensors stream encoded video to the hub
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 0;
  int duration = 0;  // frames
  double frame_rate = 20.0;
  GeoPoint home;
  std::vector<SensorSpec> sensors;
  std::vector<TargetSpec> targets;
  std::vector<LinkSpec> links;
  NoiseConfig noise;
  ReidParams reid;
  SimParams sim;
  int target_of_interest = -1;  // target id the tracking sensor follows
  int truth_assistant = -1;     // annotated correct handover, -1 when unknown

  double total_link_latency_s() const;
};

void validate_scenario(const Scenario& s);  // throws ScenarioInvalid

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string write_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// piecewise-linear waypoint interpolation, clamped at both ends
Eigen::Vector2d target_position(const TargetSpec& t, double frame);

struct SuiteOptions {
  int count = 60;
  std::uint64_t base_seed = 1000;
  bool with_distractor = true;
  std::string name_prefix = "case";
};

// staged episodes for the two-way vs one-way comparison: a target that walks
// from the tracking sensor into the annotated assistant, plus (optionally) a
// similar-looking confuser that dwells in a wrong assistant
std::vector<Scenario> make_benchmark_suite(const SuiteOptions& opts);

}  // namespace mlai
