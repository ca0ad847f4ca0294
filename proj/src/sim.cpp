#include "mlai/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "mlai/detection.hpp"
#include "mlai/geo.hpp"
#include "mlai/imaging.hpp"
#include "mlai/rng.hpp"
#include "mlai/tracking.hpp"
#include "mlai/transport.hpp"

namespace mlai {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Idle: return "IDLE";
    case Phase::Tracking: return "TRACKING";
    case Phase::AwaitingAssist: return "AWAITING_ASSIST";
    case Phase::HandingOver: return "HANDING_OVER";
    case Phase::Assisting: return "ASSISTING";
  }
  return "?";
}

namespace {

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n') c = ';';
  return out;
}

}  // namespace

std::int64_t EventLog::count(std::string_view kind) const {
  std::int64_t n = 0;
  for (const auto& e : events)
    if (e.kind == kind) ++n;
  return n;
}

const Event* EventLog::first(std::string_view kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return &e;
  return nullptr;
}

std::string EventLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events) {
    nlohmann::json j;
    j["frame"] = e.frame;
    j["sensor"] = e.sensor;
    j["event_kind"] = e.kind;
    if (e.object_id >= 0) j["object_id"] = e.object_id;
    if (e.cosine) j["cosine"] = *e.cosine;
    if (e.phi) j["phi"] = *e.phi;
    j["latency_s"] = e.latency_s;
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

void csv_row(std::string& out, const Event& e, bool with_detail) {
  out += std::to_string(e.frame);
  out += ',';
  out += std::to_string(e.sensor);
  out += ',';
  out += e.kind;
  out += ',';
  if (e.object_id >= 0) out += std::to_string(e.object_id);
  out += ',';
  if (e.cosine) out += g9(*e.cosine);
  out += ',';
  if (e.phi) out += g9(*e.phi);
  out += ',';
  out += g9(e.latency_s);
  if (with_detail) {
    out += ',';
    out += sanitize(e.detail);
  }
  out += '\n';
}

}  // namespace

std::string EventLog::to_csv() const {
  std::string out = "frame,sensor,event_kind,object_id,cosine,phi,latency_s,detail\n";
  for (const auto& e : events) csv_row(out, e, true);
  return out;
}

std::string EventLog::to_metrics_csv() const {
  std::string out = "frame,sensor,event_kind,object_id,cosine,phi,latency_s\n";
  for (const auto& e : events) csv_row(out, e, false);
  return out;
}

// ---- world rendering ----

namespace {

std::array<std::uint8_t, 3> proto_color(const PrototypeSpec& p, double u, double v) {
  int iu = int(std::floor(u));
  int iv = int(std::floor(v));
  int cell = 0;
  switch (p.pattern) {
    case PatternKind::Stripes: cell = (iv / p.period) % 2; break;
    case PatternKind::Checker: cell = (iu / p.period + iv / p.period) % 2; break;
    case PatternKind::Solid: cell = 0; break;
  }
  std::array<std::uint8_t, 3> c = cell ? p.color2 : p.color1;
  int dither = int(hash_mix(hash_mix(p.seed ^ 0xD17AULL, std::uint64_t(iu)),
                            std::uint64_t(iv)) % 21) - 10;
  for (auto& ch : c) ch = std::uint8_t(std::clamp(int(ch) + dither, 0, 255));
  return c;
}

const SensorSpec& find_sensor(const Scenario& s, SensorId id) {
  for (const auto& spec : s.sensors)
    if (spec.id == id) return spec;
  throw UnknownSensor("sensor " + std::to_string(id) + " not in scenario");
}

SceneState scene_at(const Scenario& s, double frame) {
  SceneState st;
  for (const auto& spec : s.sensors) st.sensors.push_back({spec.id, spec.fov});
  for (const auto& t : s.targets) {
    Eigen::Vector2d pos = target_position(t, frame);
    st.targets.push_back({t.id, {pos.x(), pos.y(), t.width, t.height}, t.label});
  }
  return st;
}

}  // namespace

Frame render_sensor_view(const Scenario& s, SensorId sensor, int frame_index) {
  const SensorSpec& spec = find_sensor(s, sensor);
  int w = int(spec.fov.w), h = int(spec.fov.h);
  Frame img = Frame::rgb(w, h);

  // static per-sensor background: mid-gray value noise
  std::uint64_t bg_seed = hash_mix(s.seed ^ 0xBA5EULL, sensor);
  for (int y = 0; y < h; ++y) {
    std::uint64_t row_seed = hash_mix(bg_seed, std::uint64_t(y));
    for (int x = 0; x < w; ++x) {
      std::uint8_t base = std::uint8_t(96 + (hash_mix(row_seed, std::uint64_t(x)) & 63));
      std::size_t i = img.index(x, y);
      img.pixels[i] = img.pixels[i + 1] = img.pixels[i + 2] = base;
    }
  }

  // targets in declaration order; the pattern is anchored to the box so the
  // texture travels with the target
  for (const auto& t : s.targets) {
    Eigen::Vector2d pos = target_position(t, frame_index);
    BoundingBox box{pos.x(), pos.y(), t.width, t.height};
    int x0 = std::max(0, int(std::floor(box.left() - spec.fov.x)));
    int x1 = std::min(w - 1, int(std::ceil(box.right() - spec.fov.x)));
    int y0 = std::max(0, int(std::floor(box.top() - spec.fov.y)));
    int y1 = std::min(h - 1, int(std::ceil(box.bottom() - spec.fov.y)));
    for (int y = y0; y <= y1; ++y) {
      double wy = spec.fov.y + y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        double wx = spec.fov.x + x + 0.5;
        if (!box.contains(wx, wy)) continue;
        auto c = proto_color(t.proto, wx - box.left(), wy - box.top());
        std::size_t i = img.index(x, y);
        img.pixels[i] = c[0];
        img.pixels[i + 1] = c[1];
        img.pixels[i + 2] = c[2];
      }
    }
  }

  // per-sensor illumination applied last, over background and targets alike
  if (spec.illum.gain != 1.0 || spec.illum.offset != 0.0) {
    for (auto& px : img.pixels) {
      double v = spec.illum.gain * px + spec.illum.offset;
      px = std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return img;
}

// ---- actors ----

namespace {

struct Outbound {
  ByteStream* stream = nullptr;
  std::uint64_t next_seq = 1;
};

class SensorActor {
 public:
  SensorActor(const Scenario& scn, const SensorSpec& spec, ByteStream* out, EventLog* log)
      : scn_(scn),
        spec_(spec),
        log_(log),
        tracker_(CentroidParams{scn.sim.max_dist, scn.sim.max_missed}) {
    out_.stream = out;
    telemetry_every_ = std::max(1, int(std::ceil(scn.frame_rate / 10.0)));
  }

  SensorId id() const { return spec_.id; }
  Phase phase() const { return phase_; }
  int phase_since() const { return phase_since_; }
  SensorRole role() const { return spec_.role; }
  const Gallery& gallery() const { return gallery_; }
  const std::optional<FeatureVector>& last_probe() const { return probe_; }

  void handle(const Message& m, int frame) {
    switch (m.kind) {
      case MessageKind::Command: {
        CommandPayload c = decode_command(m.payload);
        if (c.verb == CommandVerb::StartDetect && spec_.role == SensorRole::Assistant) {
          set_phase(frame, Phase::Assisting);
        } else if (c.verb == CommandVerb::StartTrack && spec_.role == SensorRole::Tracking) {
          set_phase(frame, Phase::Tracking);
        } else if (c.verb == CommandVerb::StopVision) {
          set_phase(frame, Phase::Idle);
        }
        break;
      }
      case MessageKind::Feature: {
        FeatureRef ref = split_feature_payload(m.payload);
        FeatureVector fv = parse_feature(ref.feature, fcfg_);
        if (tracking_side()) {
          score_candidate(ref.origin, ref.object, fv, frame);
        } else {
          remote_probe_ = std::move(fv);
        }
        break;
      }
      case MessageKind::StopReid: {
        handover_ = decode_stop_reid(m.payload);
        evidence_.clear();
        set_phase(frame, Phase::HandingOver);
        break;
      }
      case MessageKind::StartTracking: {
        StartTrackingPayload p = decode_start_tracking(m.payload);
        current_track_ = int(p.object_id);
        miss_streak_ = 0;
        dcf_.reset();
        set_phase(frame, Phase::Tracking);
        break;
      }
      case MessageKind::Ack: {
        if (phase_ == Phase::AwaitingAssist) {
          current_track_ = -1;
          miss_streak_ = 0;
          dcf_.reset();
          set_phase(frame, Phase::Tracking);
          log_->add({frame, int(spec_.id), "WATCH", -1, {}, {}, 0.0, "no-decision"});
        }
        break;
      }
      default:
        break;  // sensors never receive FRAME/DETECTIONS/SCORE/TELEMETRY
    }
  }

  void tick(int frame) {
    if (frame % telemetry_every_ == 0) send_telemetry(frame);
    if (phase_ == Phase::HandingOver) finish_handover(frame);
    if (phase_ == Phase::Idle) return;

    Frame view = render_sensor_view(scn_, spec_.id, frame);
    if (scn_.sim.stream_frames) send(MessageKind::Frame, encode_frame(view));

    auto dets = scripted_detect(scene_at(scn_, frame), spec_.id, scn_.noise,
                                hash_mix(scn_.seed, std::uint64_t(frame)));
    if (!dets.empty()) send(MessageKind::Detections, serialize_detections(dets));
    std::vector<int> ids = tracker_.assign(dets);
    for (std::size_t i = 0; i < dets.size(); ++i)
      log_->add({frame, int(spec_.id), "DETECT", ids[i], {}, {}, 0.0,
                 "truth=" + std::to_string(dets[i].truth_id)});

    if (phase_ == Phase::Tracking || phase_ == Phase::AwaitingAssist) {
      tick_tracking(frame, view, dets, ids);
    } else if (phase_ == Phase::Assisting) {
      tick_assisting(frame, view, dets, ids);
    }
  }

 private:
  bool tracking_side() const {
    return phase_ == Phase::Tracking || phase_ == Phase::AwaitingAssist ||
           phase_ == Phase::HandingOver || spec_.role == SensorRole::Tracking;
  }

  void set_phase(int frame, Phase next) {
    if (next == phase_) return;
    log_->add({frame, int(spec_.id), "PHASE", -1, {}, {}, 0.0,
               std::string(phase_name(phase_)) + "->" + phase_name(next)});
    phase_ = next;
    phase_since_ = frame;
  }

  void send(MessageKind kind, std::vector<std::uint8_t> payload) {
    Message m{kind, out_.next_seq++, spec_.id, std::move(payload)};
    auto bytes = frame_message(m);
    out_.stream->send(bytes);
  }

  void send_telemetry(int frame) {
    TelemetryRecord t;
    t.timestamp = frame / scn_.frame_rate;
    t.position = spec_.anchor;
    t.altitude = spec_.altitude;
    t.velocity = 0.0;
    t.heading = last_heading_;
    t.motors_on = true;
    t.home = scn_.home;
    send(MessageKind::Telemetry, encode_telemetry(t));
  }

  void finish_handover(int frame) {
    if (handover_) {
      // point the airframe at the sensor that takes over
      try {
        const SensorSpec& peer = find_sensor(scn_, handover_->chosen_assistant);
        double b = bearing(spec_.anchor, peer.anchor);
        double quad = to_quad_angle(b);
        last_heading_ = quad;
        log_->add({frame, int(spec_.id), "HEADING", std::int64_t(handover_->object_id),
                   {}, {}, 0.0, "quad=" + g9(quad) + " bearing=" + g9(b)});
      } catch (const CoincidentPoints&) {
        log_->add({frame, int(spec_.id), "HEADING", std::int64_t(handover_->object_id),
                   {}, {}, 0.0, "undefined: coincident anchors"});
      }
      handover_.reset();
    }
    current_track_ = -1;
    miss_streak_ = 0;
    dcf_.reset();
    set_phase(frame, Phase::Idle);
  }

  void score_candidate(SensorId origin, ObjectId object, const FeatureVector& fv, int frame) {
    if (!probe_ || gallery_.entries.empty() || current_track_ < 0) return;
    auto ranked = rank_gallery(fv, gallery_);
    MatchEvidence& ev = evidence_[{origin, object}];
    ev = count_receipt(ev, ranked, ObjectId(current_track_), scn_.reid.k);
    HandoverScore s = weighted_score(*probe_, fv, ev, origin, object);
    send(MessageKind::Score, serialize_score(s));
  }

  void tick_tracking(int frame, const Frame& view, const std::vector<Detection>& dets,
                     const std::vector<int>& ids) {
    int idx = -1;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (current_track_ >= 0 && ids[i] == current_track_) idx = int(i);
    if (idx < 0) {
      // (re)designation: the interest annotation stands in for the operator
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].truth_id == scn_.target_of_interest) {
          current_track_ = ids[i];
          idx = int(i);
          miss_streak_ = 0;
          if (phase_ == Phase::AwaitingAssist) {
            set_phase(frame, Phase::Tracking);
            log_->add({frame, int(spec_.id), "REACQUIRED", current_track_, {}, {}, 0.0, ""});
          }
          break;
        }
      }
    }

    if (idx >= 0) {
      miss_streak_ = 0;
      const BoundingBox& follow = dets[std::size_t(idx)].box;
      if (!dcf_) {
        dcf_.emplace(view, follow);
      } else {
        dcf_->recenter(follow);
        dcf_->update(view);
      }
      log_->add({frame, int(spec_.id), "TRACK", current_track_, {}, {}, 0.0, "det"});

      // appearance probes only from detector-confirmed boxes; a coasting
      // filter drifting off the frame edge must not pollute the probe
      if (phase_ == Phase::Tracking) {
        try {
          FeatureVector fv = extract_feature(crop(view, follow), fcfg_);
          gallery_add(gallery_, ObjectId(current_track_), fv, frame);
          probe_ = fv;
          send(MessageKind::Feature,
               encode_feature_payload(spec_.id, ObjectId(current_track_),
                                      serialize_feature(fv)));
          log_->add({frame, int(spec_.id), "PROBE", current_track_, {}, {}, 0.0, ""});
        } catch (const TooShort&) {
        } catch (const EmptyIntersection&) {
        } catch (const DegenerateFeature&) {
        }
      }
    } else if (phase_ == Phase::Tracking && current_track_ >= 0 && dcf_) {
      miss_streak_ += 1;
      DcfResult r = dcf_->update(view);
      log_->add({frame, int(spec_.id), "TRACK", current_track_, {}, {}, 0.0,
                 "dcf peak=" + g9(r.peak) + " miss=" + std::to_string(miss_streak_)});
      if (miss_streak_ >= scn_.sim.lost_after || r.lost) {
        set_phase(frame, Phase::AwaitingAssist);
        log_->add({frame, int(spec_.id), "LOST", current_track_, {}, {}, 0.0,
                   "miss=" + std::to_string(miss_streak_)});
      }
    }
  }

  void tick_assisting(int frame, const Frame& view, const std::vector<Detection>& dets,
                      const std::vector<int>& ids) {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      try {
        FeatureVector fv = extract_feature(crop(view, dets[i].box), fcfg_);
        gallery_add(gallery_, ObjectId(ids[i]), fv, frame);
      } catch (const TooShort&) {
      } catch (const EmptyIntersection&) {
      } catch (const DegenerateFeature&) {
      }
    }
    if (!remote_probe_) return;
    for (const auto& hit : assistant_filter(*remote_probe_, gallery_, scn_.reid.threshold)) {
      send(MessageKind::Feature,
           encode_feature_payload(spec_.id, hit.object_id, serialize_feature(hit.feature)));
      log_->add({frame, int(spec_.id), "CANDIDATE", std::int64_t(hit.object_id), hit.cosine,
                 {}, 0.0, ""});
    }
  }

  const Scenario& scn_;
  SensorSpec spec_;
  EventLog* log_;
  Outbound out_;
  Phase phase_ = Phase::Idle;
  int phase_since_ = 0;
  int telemetry_every_ = 2;
  FeatureConfig fcfg_;
  CentroidTracker tracker_;
  Gallery gallery_;
  std::optional<DcfTracker> dcf_;
  int current_track_ = -1;
  int miss_streak_ = 0;
  std::optional<FeatureVector> probe_;
  std::optional<FeatureVector> remote_probe_;
  std::map<std::pair<SensorId, ObjectId>, MatchEvidence> evidence_;
  std::optional<StopReidPayload> handover_;
  double last_heading_ = 0.0;
};

class Coordinator {
 public:
  Coordinator(const Scenario& scn, EventLog* log) : scn_(scn), log_(log) {
    for (const auto& spec : scn.sensors) {
      if (spec.role == SensorRole::Tracking)
        tracker_id_ = spec.id;
      else
        assistants_.push_back(spec.id);
    }
  }

  void attach(SensorId id, ByteStream* out) { out_[id] = Outbound{out, 1}; }

  void begin(int frame) {
    (void)frame;
    send_to(tracker_id_, MessageKind::Command, encode_command({CommandVerb::StartTrack, {}}));
    for (SensorId a : assistants_)
      send_to(a, MessageKind::Command, encode_command({CommandVerb::StartDetect, {}}));
  }

  void handle(const Message& m, int frame) {
    switch (m.kind) {
      case MessageKind::Frame:
        decode_frame(m.payload);  // exercises the codec on every hop
        break;
      case MessageKind::Detections:
        parse_detections(m.payload);
        break;
      case MessageKind::Telemetry: {
        TelemetryRecord t = decode_telemetry(m.payload);
        log_->add({frame, int(m.sender), "TELEMETRY", -1, {}, {}, 0.0,
                   "t=" + g9(t.timestamp) + " heading=" + g9(t.heading)});
        break;
      }
      case MessageKind::Feature: {
        if (m.sender == tracker_id_) {
          last_probe_frame_ = frame;
          probes_seen_ = true;
          acked_ = false;
          for (SensorId a : assistants_)
            if (active_.count(a) == 0) send_to(a, MessageKind::Feature, m.payload);
        } else {
          send_to(tracker_id_, MessageKind::Feature, m.payload);
        }
        break;
      }
      case MessageKind::Score: {
        HandoverScore s = parse_score(m.payload);
        scores_[{s.assistant, s.object_id}] = s;
        receipts_[{s.assistant, s.object_id}] += 1;
        log_->add({frame, int(s.assistant), "SCORE", std::int64_t(s.object_id), s.cosine,
                   s.phi, 0.0, "receipts=" + std::to_string(receipts_[{s.assistant, s.object_id}])});
        break;
      }
      default:
        break;
    }
  }

  void tick(int frame) {
    if (!probes_seen_) return;
    int silent = frame - last_probe_frame_;
    if (silent < scn_.sim.patience) return;

    const HandoverScore* best = nullptr;
    for (const auto& [key, s] : scores_) {
      if (s.phi <= 0.0) continue;
      if (!best || s.phi > best->phi || (s.phi == best->phi && s.assistant < best->assistant))
        best = &s;
    }

    if (best && receipts_[{best->assistant, best->object_id}] >= scn_.sim.min_receipts) {
      issue_handover(frame, *best);
    } else if (!best && silent >= scn_.sim.giveup && !acked_) {
      send_to(tracker_id_, MessageKind::Ack, {});
      acked_ = true;
      log_->add({frame, -1, "NO_DECISION", -1, {}, {}, 0.0,
                 "silent=" + std::to_string(silent)});
    }
  }

  // the decision timer is armed whenever probes have gone quiet on an open
  // episode; quiescence checks and the watchdog key off this
  bool timer_armed(int frame) const {
    return probes_seen_ && !acked_ && frame > last_probe_frame_;
  }

  std::optional<SensorId> first_handover() const { return first_handover_; }

 private:
  void issue_handover(int frame, const HandoverScore& best) {
    send_to(tracker_id_, MessageKind::StopReid,
            encode_stop_reid({best.assistant, best.object_id}));
    send_to(best.assistant, MessageKind::StartTracking,
            encode_start_tracking({best.object_id}));
    for (SensorId a : assistants_)
      if (a != best.assistant && active_.count(a) == 0)
        send_to(a, MessageKind::Command, encode_command({CommandVerb::StopVision, {}}));
    log_->add({frame, int(best.assistant), "HANDOVER", std::int64_t(best.object_id),
               best.cosine, best.phi, 0.0,
               "from=" + std::to_string(tracker_id_)});
    if (!first_handover_) first_handover_ = best.assistant;

    // the chosen assistant becomes the tracking sensor; a fresh episode
    // starts when its probes begin to flow
    active_.insert(tracker_id_);  // retired sensors take no further part
    for (SensorId a : assistants_)
      if (a != best.assistant) active_.insert(a);
    tracker_id_ = best.assistant;
    assistants_.erase(std::remove(assistants_.begin(), assistants_.end(), best.assistant),
                      assistants_.end());
    scores_.clear();
    receipts_.clear();
    probes_seen_ = false;
    last_probe_frame_ = -1;
    acked_ = false;
  }

  void send_to(SensorId id, MessageKind kind, std::vector<std::uint8_t> payload) {
    Outbound& o = out_.at(id);
    Message m{kind, o.next_seq++, kHubId, std::move(payload)};
    auto bytes = frame_message(m);
    o.stream->send(bytes);
  }

  const Scenario& scn_;
  EventLog* log_;
  std::map<SensorId, Outbound> out_;
  SensorId tracker_id_ = 0;
  std::vector<SensorId> assistants_;
  std::set<SensorId> active_;  // retired (stopped) sensors, by id
  int last_probe_frame_ = -1;
  bool probes_seen_ = false;
  bool acked_ = false;
  std::map<std::pair<SensorId, ObjectId>, HandoverScore> scores_;
  std::map<std::pair<SensorId, ObjectId>, int> receipts_;
  std::optional<SensorId> first_handover_;
};

class Simulation {
 public:
  Simulation(const Scenario& scn, const RunOptions& opts)
      : scn_(scn), opts_(opts), coordinator_(scn, &log_) {
    std::vector<SensorSpec> ordered = scn.sensors;
    std::sort(ordered.begin(), ordered.end(),
              [](const SensorSpec& a, const SensorSpec& b) { return a.id < b.id; });
    for (const auto& spec : ordered) {
      auto [sensor_end, hub_end] = make_loopback();
      auto actor = std::make_unique<SensorActor>(scn, spec, sensor_end.get(), &log_);
      ports_.push_back(Port{spec.id, std::move(sensor_end), std::move(hub_end),
                            std::move(actor), FrameReader{}, FrameReader{},
                            SequenceChecker{}});
      coordinator_.attach(spec.id, ports_.back().hub_stream.get());
    }
  }

  RunResult run() {
    log_.add({0, -1, "SCENARIO_START", -1, {}, {}, 0.0,
              "name=" + scn_.name + " seed=" + std::to_string(scn_.seed)});
    coordinator_.begin(0);
    double latency = scn_.total_link_latency_s();
    int watchdog_frames = std::max(1, int(std::ceil(10.0 * scn_.frame_rate)));

    for (int f = 0; f < scn_.duration; ++f) {
      for (auto& p : ports_) p.actor->tick(f);
      drain(f, latency);
      coordinator_.tick(f);
      drain(f, latency);

      bool transient = false;
      for (auto& p : ports_) {
        Phase ph = p.actor->phase();
        if (ph == Phase::AwaitingAssist || ph == Phase::HandingOver) {
          transient = true;
          if (f - p.actor->phase_since() > watchdog_frames)
            throw DeadlockError("sensor " + std::to_string(p.id) + " stuck in " +
                                phase_name(ph) + " for over 10 simulated seconds");
        }
      }
      if (opts_.check_invariants && !transient && !coordinator_.timer_armed(f)) {
        int tracking = 0;
        for (auto& p : ports_)
          if (p.actor->phase() == Phase::Tracking) ++tracking;
        if (tracking != 1)
          throw InvariantViolation("frame " + std::to_string(f) + ": " +
                                   std::to_string(tracking) +
                                   " sensors in phase TRACKING at a quiescent state");
      }
    }
    log_.add({scn_.duration - 1, -1, "SCENARIO_END", -1, {}, {}, 0.0, ""});

    RunResult r;
    r.handover_to = coordinator_.first_handover();
    for (auto& p : ports_) r.final_phases[p.id] = p.actor->phase();

    // one-way baseline: the original tracker's final probe against the
    // original assistants' final galleries
    const SensorActor* tracker = nullptr;
    std::map<SensorId, Gallery> galleries;
    for (auto& p : ports_) {
      if (p.actor->role() == SensorRole::Tracking)
        tracker = p.actor.get();
      else
        galleries.emplace(p.id, p.actor->gallery());
    }
    if (tracker && tracker->last_probe())
      r.one_way_choice = one_way_decide(*tracker->last_probe(), galleries, scn_.reid.threshold);

    r.log = std::move(log_);
    return r;
  }

 private:
  struct Port {
    SensorId id;
    std::unique_ptr<ByteStream> sensor_stream;  // sensor-side endpoint
    std::unique_ptr<ByteStream> hub_stream;     // hub-side endpoint
    std::unique_ptr<SensorActor> actor;
    FrameReader to_hub;     // reassembles sensor -> hub bytes
    FrameReader to_sensor;  // reassembles hub -> sensor bytes
    SequenceChecker sensor_seq;
  };

  void drain(int frame, double latency) {
    for (int pass = 0;; ++pass) {
      if (pass > 10000) throw DeadlockError("message storm: drain did not quiesce");
      int moved = 0;
      for (auto& p : ports_) {
        p.to_hub.feed(p.hub_stream->receive_available());
        while (auto m = p.to_hub.next()) {
          hub_seq_.observe(*m);
          log_.add({frame, -1, std::string("MSG_") + kind_name(m->kind), -1, {}, {}, latency,
                    "from=" + std::to_string(m->sender) + " seq=" + std::to_string(m->sequence)});
          coordinator_.handle(*m, frame);
          ++moved;
        }
      }
      for (auto& p : ports_) {
        p.to_sensor.feed(p.sensor_stream->receive_available());
        while (auto m = p.to_sensor.next()) {
          p.sensor_seq.observe(*m);
          log_.add({frame, int(p.id), std::string("MSG_") + kind_name(m->kind), -1, {}, {},
                    latency,
                    "from=" + std::to_string(m->sender) + " seq=" + std::to_string(m->sequence)});
          p.actor->handle(*m, frame);
          ++moved;
        }
      }
      if (moved == 0) break;
    }
  }

  const Scenario& scn_;
  RunOptions opts_;
  EventLog log_;
  Coordinator coordinator_;
  std::vector<Port> ports_;
  SequenceChecker hub_seq_;
};

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opts) {
  validate_scenario(s);
  Simulation sim(s, opts);
  return sim.run();
}

double ComparisonReport::two_way_accuracy() const {
  if (rows.empty()) return 0.0;
  int ok = 0;
  for (const auto& r : rows) ok += r.two_way_correct() ? 1 : 0;
  return double(ok) / double(rows.size());
}

double ComparisonReport::one_way_accuracy() const {
  if (rows.empty()) return 0.0;
  int ok = 0;
  for (const auto& r : rows) ok += r.one_way_correct() ? 1 : 0;
  return double(ok) / double(rows.size());
}

ComparisonReport compare_reid(std::span<const Scenario> suite, const RunOptions& opts) {
  ComparisonReport report;
  for (const auto& s : suite) {
    RunResult r = run_scenario(s, opts);
    ScenarioOutcome row;
    row.name = s.name;
    row.truth = s.truth_assistant;
    row.two_way = r.handover_to;
    row.one_way = r.one_way_choice;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out = "scenario,truth,two_way,one_way,two_way_correct,one_way_correct\n";
  for (const auto& r : report.rows) {
    out += r.name;
    out += ',';
    out += r.truth >= 0 ? std::to_string(r.truth) : "";
    out += ',';
    out += r.two_way ? std::to_string(*r.two_way) : "";
    out += ',';
    out += r.one_way ? std::to_string(*r.one_way) : "";
    out += ',';
    out += r.two_way_correct() ? "1" : "0";
    out += ',';
    out += r.one_way_correct() ? "1" : "0";
    out += '\n';
  }
  return out;
}

}  // namespace mlai
