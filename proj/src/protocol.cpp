#include "mlai/protocol.hpp"

#include <algorithm>

#include "mlai/wire.hpp"

namespace mlai {

const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Frame: return "FRAME";
    case MessageKind::Feature: return "FEATURE";
    case MessageKind::Command: return "COMMAND";
    case MessageKind::Detections: return "DETECTIONS";
    case MessageKind::Score: return "SCORE";
    case MessageKind::StopReid: return "STOP_REID";
    case MessageKind::StartTracking: return "START_TRACKING";
    case MessageKind::Telemetry: return "TELEMETRY";
    case MessageKind::Ack: return "ACK";
  }
  return "UNKNOWN";
}

namespace {

constexpr std::size_t kHeaderAfterLength = 11;  // kind + sequence + sender

bool valid_kind(std::uint8_t k) {
  return k >= std::uint8_t(MessageKind::Frame) && k <= std::uint8_t(MessageKind::Ack);
}

}  // namespace

std::vector<std::uint8_t> frame_message(const Message& m) {
  if (m.payload.size() > kMaxPayload) throw PayloadTooLarge{};
  std::vector<std::uint8_t> out;
  out.reserve(4 + kHeaderAfterLength + m.payload.size());
  wire::put_u32(out, std::uint32_t(kHeaderAfterLength + m.payload.size()));
  wire::put_u8(out, std::uint8_t(m.kind));
  wire::put_u64(out, m.sequence);
  wire::put_u16(out, m.sender);
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

std::optional<Unframed> unframe(std::span<const std::uint8_t> buffer) {
  if (buffer.size() < 4) return std::nullopt;
  wire::Reader r(buffer);
  std::uint32_t length = r.u32();
  if (length < kHeaderAfterLength)
    throw CorruptFrame("frame length " + std::to_string(length) + " below header size");
  if (buffer.size() - 4 < length) return std::nullopt;
  Unframed u;
  std::uint8_t kind = r.u8();
  if (!valid_kind(kind)) throw CorruptFrame("unknown message kind " + std::to_string(kind));
  u.message.kind = MessageKind(kind);
  u.message.sequence = r.u64();
  u.message.sender = r.u16();
  auto body = r.bytes(length - kHeaderAfterLength);
  u.message.payload.assign(body.begin(), body.end());
  u.consumed = 4 + std::size_t(length);
  return u;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameReader::next() {
  auto u = unframe(std::span(buf_).subspan(consumed_));
  if (!u) return std::nullopt;
  consumed_ += u->consumed;
  // compact once the consumed prefix dominates the buffer
  if (consumed_ > 4096 && consumed_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + std::ptrdiff_t(consumed_));
    consumed_ = 0;
  }
  return std::move(u->message);
}

// ---- payload codecs ----

std::vector<std::uint8_t> encode_command(const CommandPayload& c) {
  std::vector<std::uint8_t> out;
  wire::put_u8(out, std::uint8_t(c.verb));
  wire::put_u8(out, c.target ? 1 : 0);
  if (c.target) {
    wire::put_f64(out, c.target->cx);
    wire::put_f64(out, c.target->cy);
    wire::put_f64(out, c.target->w);
    wire::put_f64(out, c.target->h);
  }
  return out;
}

CommandPayload decode_command(std::span<const std::uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    CommandPayload c;
    std::uint8_t verb = r.u8();
    if (verb < 1 || verb > 3)
      throw CorruptFrame("unknown command verb " + std::to_string(verb));
    c.verb = CommandVerb(verb);
    if (r.u8() != 0) {
      BoundingBox b;
      b.cx = r.f64();
      b.cy = r.f64();
      b.w = r.f64();
      b.h = r.f64();
      c.target = b;
    }
    return c;
  } catch (const wire::ShortRead&) {
    throw CorruptFrame("command payload truncated");
  }
}

std::vector<std::uint8_t> encode_stop_reid(const StopReidPayload& p) {
  std::vector<std::uint8_t> out;
  wire::put_u16(out, p.chosen_assistant);
  wire::put_u32(out, p.object_id);
  return out;
}

StopReidPayload decode_stop_reid(std::span<const std::uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    StopReidPayload p;
    p.chosen_assistant = r.u16();
    p.object_id = r.u32();
    return p;
  } catch (const wire::ShortRead&) {
    throw CorruptFrame("stop-reid payload truncated");
  }
}

std::vector<std::uint8_t> encode_start_tracking(const StartTrackingPayload& p) {
  std::vector<std::uint8_t> out;
  wire::put_u32(out, p.object_id);
  return out;
}

StartTrackingPayload decode_start_tracking(std::span<const std::uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    StartTrackingPayload p;
    p.object_id = r.u32();
    return p;
  } catch (const wire::ShortRead&) {
    throw CorruptFrame("start-tracking payload truncated");
  }
}

std::vector<std::uint8_t> encode_telemetry(const TelemetryRecord& t) {
  std::vector<std::uint8_t> out;
  wire::put_f64(out, t.timestamp);
  wire::put_f64(out, t.position.latitude);
  wire::put_f64(out, t.position.longitude);
  wire::put_f64(out, t.altitude);
  wire::put_f64(out, t.velocity);
  wire::put_f64(out, t.heading);
  wire::put_u8(out, t.motors_on ? 1 : 0);
  wire::put_f64(out, t.home.latitude);
  wire::put_f64(out, t.home.longitude);
  return out;
}

TelemetryRecord decode_telemetry(std::span<const std::uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    TelemetryRecord t;
    t.timestamp = r.f64();
    t.position.latitude = r.f64();
    t.position.longitude = r.f64();
    t.altitude = r.f64();
    t.velocity = r.f64();
    t.heading = r.f64();
    t.motors_on = r.u8() != 0;
    t.home.latitude = r.f64();
    t.home.longitude = r.f64();
    return t;
  } catch (const wire::ShortRead&) {
    throw CorruptFrame("telemetry payload truncated");
  }
}

std::vector<std::uint8_t> encode_feature_payload(SensorId origin, ObjectId object,
                                                 std::span<const std::uint8_t> feature_bytes) {
  std::vector<std::uint8_t> out;
  wire::put_u16(out, origin);
  wire::put_u32(out, object);
  out.insert(out.end(), feature_bytes.begin(), feature_bytes.end());
  return out;
}

FeatureRef split_feature_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw CorruptFrame("feature payload truncated");
  wire::Reader r(bytes);
  FeatureRef ref;
  ref.origin = r.u16();
  ref.object = r.u32();
  ref.feature = bytes.subspan(6);
  return ref;
}

void SequenceChecker::observe(const Message& m) {
  auto it = last.find(m.sender);
  if (it == last.end()) {
    if (m.sequence != 1)
      throw CorruptFrame("sender " + std::to_string(m.sender) + " opened with sequence " +
                         std::to_string(m.sequence));
    last.emplace(m.sender, m.sequence);
    return;
  }
  if (m.sequence != it->second + 1)
    throw CorruptFrame("sender " + std::to_string(m.sender) + " jumped from sequence " +
                       std::to_string(it->second) + " to " + std::to_string(m.sequence));
  it->second = m.sequence;
}

// ---- request quality scoring ----

RequestClass classify_request(const RequestTimer& t, double threshold_s) {
  if (t.failed) return RequestClass::Failed;
  double latency = t.end_s - t.start_s;
  if (latency <= threshold_s) return RequestClass::Satisfied;
  if (latency <= 4.0 * threshold_s) return RequestClass::Tolerating;
  return RequestClass::Frustrated;
}

void ApdexCounters::add(RequestClass c) {
  switch (c) {
    case RequestClass::Satisfied: satisfied += 1; break;
    case RequestClass::Tolerating: tolerating += 1; break;
    case RequestClass::Frustrated: frustrated += 1; break;
    case RequestClass::Failed: failed += 1; break;
  }
}

double apdex(const ApdexCounters& c) {
  std::int64_t n = c.total();
  if (n == 0) throw NoSamples{};
  return (double(c.satisfied) + double(c.tolerating) / 2.0) / double(n);
}

}  // namespace mlai
