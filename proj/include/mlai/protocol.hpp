#pragma once

// message framing and payload codecs for the sensor network.
//
// frame layout (big-endian):
//   total length u32 | kind u8 | sequence u64 | sender u16 | payload bytes
// the length counts everything after the length field itself, so an empty
// payload gives length 11. sequence numbers are per-sender, start at 1, and
// increase by 1 per message; over the reliable ordered transports used here a
// receiver must observe them gapless and strictly increasing.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlai/box.hpp"
#include "mlai/geo.hpp"
#include "mlai/types.hpp"

namespace mlai {

struct PayloadTooLarge : std::runtime_error {
  PayloadTooLarge() : std::runtime_error("payload exceeds the framing limit") {}
};

struct CorruptFrame : std::runtime_error {
  explicit CorruptFrame(const std::string& what) : std::runtime_error(what) {}
};

struct NoSamples : std::runtime_error {
  NoSamples() : std::runtime_error("apdex over zero requests is undefined") {}
};

enum class MessageKind : std::uint8_t {
  Frame = 1,          // MLF1-encoded video frame
  Feature = 2,        // probe or candidate appearance feature
  Command = 3,        // verb + optional target box
  Detections = 4,     // detector output batch
  Score = 5,          // weighted handover score
  StopReid = 6,       // handover decision toward the tracking sensor
  StartTracking = 7,  // handover decision toward the chosen assistant
  Telemetry = 8,
  Ack = 9,
};

const char* kind_name(MessageKind k);

struct Message {
  MessageKind kind = MessageKind::Ack;
  std::uint64_t sequence = 0;
  SensorId sender = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Message&) const = default;
};

inline constexpr std::uint64_t kMaxPayload = (1ULL << 32) - 16;

std::vector<std::uint8_t> frame_message(const Message& m);

struct Unframed {
  Message message;
  std::size_t consumed = 0;
};

// nullopt means the buffer holds an incomplete frame; CorruptFrame means the
// prefix can never become a valid frame
std::optional<Unframed> unframe(std::span<const std::uint8_t> buffer);

// incremental reassembly over an arbitrary fragmentation of the byte stream
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Message> next();
  std::size_t buffered() const { return buf_.size() - consumed_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t consumed_ = 0;
};

// ---- payload codecs ----

enum class CommandVerb : std::uint8_t {
  StartDetect = 1,
  StartTrack = 2,
  StopVision = 3,
};

struct CommandPayload {
  CommandVerb verb = CommandVerb::StartDetect;
  std::optional<BoundingBox> target;  // present for StartTrack
};

std::vector<std::uint8_t> encode_command(const CommandPayload& c);
CommandPayload decode_command(std::span<const std::uint8_t> bytes);

struct StopReidPayload {
  SensorId chosen_assistant = 0;
  ObjectId object_id = 0;
};

std::vector<std::uint8_t> encode_stop_reid(const StopReidPayload& p);
StopReidPayload decode_stop_reid(std::span<const std::uint8_t> bytes);

struct StartTrackingPayload {
  ObjectId object_id = 0;
};

std::vector<std::uint8_t> encode_start_tracking(const StartTrackingPayload& p);
StartTrackingPayload decode_start_tracking(std::span<const std::uint8_t> bytes);

struct TelemetryRecord {
  double timestamp = 0.0;  // seconds since scenario start
  GeoPoint position;
  double altitude = 0.0;
  double velocity = 0.0;
  double heading = 0.0;
  bool motors_on = false;
  GeoPoint home;
};

std::vector<std::uint8_t> encode_telemetry(const TelemetryRecord& t);
TelemetryRecord decode_telemetry(std::span<const std::uint8_t> bytes);

// feature payloads carry the originating sensor explicitly so the hub can
// relay them without re-authoring: origin u16 | object u32 | feature record
struct FeatureRef {
  SensorId origin = 0;
  ObjectId object = 0;
  std::span<const std::uint8_t> feature;
};

std::vector<std::uint8_t> encode_feature_payload(SensorId origin, ObjectId object,
                                                 std::span<const std::uint8_t> feature_bytes);
FeatureRef split_feature_payload(std::span<const std::uint8_t> bytes);

// enforces that a receiver sees each sender's sequence numbers start at 1 and
// increase by exactly 1, which must hold over a reliable ordered transport
struct SequenceChecker {
  std::map<SensorId, std::uint64_t> last;
  void observe(const Message& m);
};

// ---- request quality scoring ----

enum class RequestClass { Satisfied, Tolerating, Frustrated, Failed };

struct RequestTimer {
  std::string name;      // e.g. "detect", "track"
  double start_s = 0.0;
  double end_s = 0.0;
  bool failed = false;
};

// boundary latencies count toward the better class: latency == T is
// Satisfied, latency == 4T is Tolerating
RequestClass classify_request(const RequestTimer& t, double threshold_s = 0.5);

struct ApdexCounters {
  std::int64_t satisfied = 0;
  std::int64_t tolerating = 0;
  std::int64_t frustrated = 0;
  std::int64_t failed = 0;

  std::int64_t total() const { return satisfied + tolerating + frustrated + failed; }
  void add(RequestClass c);
};

// (satisfied + tolerating/2) / total; throws NoSamples on an empty tally
double apdex(const ApdexCounters& c);

}  // namespace mlai
