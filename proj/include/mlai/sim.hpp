#pragma once

// deterministic simulation of the sensor network. each sensor runs its own
// render / detect / track / describe pipeline and talks to a coordinator hub
// over framed loopback streams; the hub relays probe and candidate features,
// accumulates weighted scores, and issues the handover decision. one frame =
// every actor ticks once, then messages are drained to quiescence.
//
// a run is quiescent at the end of a frame when no messages are in flight,
// no coordinator timer is armed, and no sensor sits in a transient phase
// (AWAITING_ASSIST, HANDING_OVER). at every quiescent point exactly one
// sensor is in phase TRACKING; run_scenario enforces that.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlai/frame.hpp"
#include "mlai/protocol.hpp"
#include "mlai/reid.hpp"
#include "mlai/scenario.hpp"

namespace mlai {

struct DeadlockError : std::runtime_error {
  explicit DeadlockError(const std::string& what) : std::runtime_error(what) {}
};

struct InvariantViolation : std::logic_error {
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

// hub address in message sender fields; scenario sensors may not claim it
inline constexpr SensorId kHubId = 0xFFFF;

enum class Phase { Idle, Tracking, AwaitingAssist, HandingOver, Assisting };

const char* phase_name(Phase p);

struct Event {
  int frame = -1;
  int sensor = -1;  // -1 = hub
  std::string kind;
  std::int64_t object_id = -1;
  std::optional<double> cosine;
  std::optional<double> phi;
  double latency_s = 0.0;
  std::string detail;
};

struct EventLog {
  std::vector<Event> events;

  void add(Event e) { events.push_back(std::move(e)); }
  std::int64_t count(std::string_view kind) const;
  const Event* first(std::string_view kind) const;

  // identical bytes for identical runs of the same build
  std::string to_jsonl() const;
  std::string to_csv() const;          // metrics columns plus detail
  std::string to_metrics_csv() const;  // frame,sensor,event_kind,object_id,cosine,phi,latency_s
};

// deterministic world rendering: seeded value-noise background, procedural
// two-color targets anchored to their boxes, per-sensor illumination applied
// last. throws UnknownSensor.
Frame render_sensor_view(const Scenario& s, SensorId sensor, int frame_index);

struct RunOptions {
  bool check_invariants = true;
};

struct RunResult {
  EventLog log;
  std::optional<SensorId> handover_to;     // first completed handover
  std::optional<SensorId> one_way_choice;  // single best cosine over final galleries
  std::map<SensorId, Phase> final_phases;
};

RunResult run_scenario(const Scenario& s, const RunOptions& opts = {});

struct ScenarioOutcome {
  std::string name;
  int truth = -1;
  std::optional<SensorId> two_way;
  std::optional<SensorId> one_way;

  bool two_way_correct() const { return two_way && truth >= 0 && int(*two_way) == truth; }
  bool one_way_correct() const { return one_way && truth >= 0 && int(*one_way) == truth; }
};

struct ComparisonReport {
  std::vector<ScenarioOutcome> rows;

  int scenarios() const { return int(rows.size()); }
  double two_way_accuracy() const;
  double one_way_accuracy() const;
};

// runs every scenario and pits the in-run handover decision against the
// one-way baseline computed from the same final galleries
ComparisonReport compare_reid(std::span<const Scenario> suite, const RunOptions& opts = {});

std::string comparison_csv(const ComparisonReport& report);

}  // namespace mlai
