// mlai: run scenarios, benchmark the protocol stack, compare handover
// strategies, extract appearance features, and inspect artifacts.
//
// exit codes: 0 success, 1 usage, 2 invalid scenario, 3 deadlock or protocol
// invariant failure, 4 I/O or transport failure. diagnostics go to stderr,
// data and reports to stdout. MLAI_LOG=info|debug raises stderr verbosity.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "mlai/detection.hpp"
#include "mlai/features.hpp"
#include "mlai/imaging.hpp"
#include "mlai/protocol.hpp"
#include "mlai/rng.hpp"
#include "mlai/scenario.hpp"
#include "mlai/sim.hpp"
#include "mlai/tracking.hpp"
#include "mlai/transport.hpp"

namespace fs = std::filesystem;
using namespace mlai;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitScenario = 2;
constexpr int kExitDeadlock = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

int verbosity() {
  const char* v = std::getenv("MLAI_LOG");
  if (!v) return 0;
  std::string s = v;
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (verbosity() >= 1) std::fprintf(stderr, "[mlai] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (verbosity() >= 2) std::fprintf(stderr, "[mlai] %s\n", msg.c_str());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---- run ----

struct RunArgs {
  std::string scenario;
  std::string out_dir = ".";
  std::string format = "jsonl";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_run(const RunArgs& a) {
  Scenario s = load_scenario(a.scenario);
  if (a.seed_set) s.seed = a.seed;
  log_info("running " + s.name + " for " + std::to_string(s.duration) + " frames");

  RunResult r = run_scenario(s);

  fs::create_directories(a.out_dir);
  fs::path events_path = fs::path(a.out_dir) / (a.format == "csv" ? "events.csv" : "events.jsonl");
  write_file(events_path, a.format == "csv" ? r.log.to_csv() : r.log.to_jsonl());
  fs::path metrics_path = fs::path(a.out_dir) / "metrics.csv";
  write_file(metrics_path, r.log.to_metrics_csv());

  std::printf("scenario %s: %d frames, %zu sensors, %zu events\n", s.name.c_str(), s.duration,
              s.sensors.size(), r.log.events.size());
  if (const Event* h = r.log.first("HANDOVER"))
    std::printf("handover -> sensor %d (object %lld) at frame %d, phi=%s cos=%s\n", h->sensor,
                (long long)h->object_id, h->frame, fmt("%.9g", h->phi.value_or(0)).c_str(),
                fmt("%.9g", h->cosine.value_or(0)).c_str());
  else
    std::printf("handover -> none\n");
  std::printf("final phases:");
  for (const auto& [id, ph] : r.final_phases) std::printf(" %u=%s", unsigned(id), phase_name(ph));
  std::printf("\n");
  std::printf("wrote %s and %s\n", events_path.string().c_str(), metrics_path.string().c_str());
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  int samples = 100;
  double threshold_s = 0.5;
  std::string inject;
  std::uint64_t seed = 0;
};

// a minimal in-memory scene for the benchmark server: one sensor, one target
Scenario bench_scenario(std::uint64_t seed) {
  Scenario s;
  s.name = "bench";
  s.seed = seed;
  s.duration = 1 << 20;
  s.frame_rate = 20.0;
  s.sensors.push_back({0, SensorRole::Tracking, {0, 0, 320, 240}, {47.0, 8.0}, 30.0, {}});
  s.sensors.push_back({1, SensorRole::Assistant, {400, 0, 64, 64}, {47.0, 8.001}, 30.0, {}});
  TargetSpec t;
  t.id = 1;
  t.width = 24;
  t.height = 42;
  t.proto = {PatternKind::Stripes, 5, {210, 70, 60}, {240, 210, 80}, 6};
  t.waypoints = {{0, 60, 60}, {400, 260, 180}, {800, 60, 180}, {1200, 260, 60}};
  s.targets.push_back(t);
  s.target_of_interest = 1;
  return s;
}

SceneState bench_scene_at(const Scenario& s, double frame) {
  SceneState st;
  for (const auto& spec : s.sensors) st.sensors.push_back({spec.id, spec.fov});
  for (const auto& t : s.targets) {
    Eigen::Vector2d pos = target_position(t, frame);
    st.targets.push_back({t.id, {pos.x(), pos.y(), t.width, t.height}, t.label});
  }
  return st;
}

// serves detect and track requests over a framed byte stream until it sees
// StopVision. requests arrive as COMMAND then FRAME; replies are DETECTIONS.
void bench_server(FdStream* stream, const Scenario& scn) {
  FrameReader reader;
  std::optional<CommandVerb> pending;
  std::optional<BoundingBox> pending_box;
  std::optional<DcfTracker> dcf;
  std::uint64_t seq = 1;
  int frame_no = 0;
  for (;;) {
    if (!stream->wait_readable(5000)) return;
    reader.feed(stream->receive_available());
    while (auto m = reader.next()) {
      if (m->kind == MessageKind::Command) {
        CommandPayload c = decode_command(m->payload);
        if (c.verb == CommandVerb::StopVision) return;
        pending = c.verb;
        pending_box = c.target;
      } else if (m->kind == MessageKind::Frame && pending) {
        Frame f = decode_frame(m->payload);
        std::vector<Detection> dets;
        if (*pending == CommandVerb::StartDetect) {
          dets = scripted_detect(bench_scene_at(scn, frame_no), 0, scn.noise,
                                 hash_mix(scn.seed, std::uint64_t(frame_no)));
        } else {
          if (!dcf && pending_box) dcf = DcfTracker(f, *pending_box);
          if (dcf) {
            DcfResult r = dcf->update(f);
            Detection d;
            d.box = r.box;
            d.objectness = r.peak;
            dets.push_back(d);
          }
        }
        Message reply{MessageKind::Detections, seq++, 1, serialize_detections(dets)};
        auto bytes = frame_message(reply);
        stream->send(bytes);
        ++frame_no;
      }
    }
  }
}

void print_apdex_table(const std::vector<std::pair<std::string, ApdexCounters>>& rows) {
  std::printf("%-14s %10s %11s %8s %12s\n", "request", "satisfied", "tolerating", "total",
              "apdex score");
  for (const auto& [name, c] : rows)
    std::printf("%-14s %10lld %11lld %8lld %12s\n", name.c_str(), (long long)c.satisfied,
                (long long)c.tolerating, (long long)c.total(), fmt("%.9g", apdex(c)).c_str());
}

ApdexCounters inject_counters(const std::string& spec, double threshold_s) {
  ApdexCounters c;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto x = tok.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= tok.size())
      throw CLI::ValidationError("--inject expects COUNTxLATENCY[,...], got '" + tok + "'");
    int count = std::stoi(tok.substr(0, x));
    std::string lat = tok.substr(x + 1);
    for (int i = 0; i < count; ++i) {
      RequestTimer t{"injected", 0.0, 0.0, false};
      if (lat == "fail")
        t.failed = true;
      else
        t.end_s = std::stod(lat);
      c.add(classify_request(t, threshold_s));
    }
  }
  if (c.total() == 0) throw CLI::ValidationError("--inject spec yields zero requests");
  return c;
}

int cmd_bench(const BenchArgs& a) {
  if (!a.inject.empty()) {
    ApdexCounters c = inject_counters(a.inject, a.threshold_s);
    print_apdex_table({{"injected", c}});
    return kExitOk;
  }

  Scenario scn = bench_scenario(a.seed);
  auto [client, server] = make_socketpair();
  std::thread srv(bench_server, server.get(), std::cref(scn));

  auto request = [&](std::uint64_t& seq, FrameReader& reader, CommandVerb verb,
                     std::optional<BoundingBox> box, const Frame& frame) -> double {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    Message cmd{MessageKind::Command, seq++, 0, encode_command({verb, box})};
    auto b1 = frame_message(cmd);
    client->send(b1);
    Message img{MessageKind::Frame, seq++, 0, encode_frame(frame)};
    auto b2 = frame_message(img);
    client->send(b2);
    for (;;) {
      if (auto m = reader.next()) {
        if (m->kind == MessageKind::Detections) {
          parse_detections(m->payload);
          break;
        }
      } else {
        if (!client->wait_readable(5000)) throw IoError("benchmark reply timed out");
        reader.feed(client->receive_available());
      }
    }
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  ApdexCounters detect_c, track_c;
  std::uint64_t seq = 1;
  FrameReader reader;
  Eigen::Vector2d p0 = target_position(scn.targets[0], 0);
  BoundingBox target0{p0.x(), p0.y(), scn.targets[0].width, scn.targets[0].height};

  auto stop_server = [&] {
    Message stop{MessageKind::Command, seq++, 0, encode_command({CommandVerb::StopVision, {}})};
    auto bs = frame_message(stop);
    client->send(bs);
    srv.join();
  };

  try {
    for (int i = 0; i < a.samples; ++i) {
      Frame f = render_sensor_view(scn, 0, i);
      double d = request(seq, reader, CommandVerb::StartDetect, {}, f);
      detect_c.add(classify_request({"detect", 0.0, d, false}, a.threshold_s));
      log_debug("detect " + std::to_string(i) + ": " + fmt("%.6f", d) + "s");
    }
    for (int i = 0; i < a.samples; ++i) {
      Frame f = render_sensor_view(scn, 0, i);
      double d = request(seq, reader, CommandVerb::StartTrack,
                         i == 0 ? std::optional<BoundingBox>(target0) : std::nullopt, f);
      track_c.add(classify_request({"track", 0.0, d, false}, a.threshold_s));
      log_debug("track " + std::to_string(i) + ": " + fmt("%.6f", d) + "s");
    }
  } catch (...) {
    stop_server();
    throw;
  }
  stop_server();

  print_apdex_table({{"object_detect", detect_c}, {"object_track", track_c}});
  return kExitOk;
}

// ---- compare-reid ----

struct CompareArgs {
  std::string suite_dir;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_compare_reid(const CompareArgs& a) {
  if (!fs::is_directory(a.suite_dir))
    throw ScenarioInvalid("suite directory " + a.suite_dir + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.suite_dir))
    if (entry.path().extension() == ".scn") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ScenarioInvalid("suite directory " + a.suite_dir + " has no .scn files");

  std::vector<Scenario> suite;
  for (std::size_t i = 0; i < files.size(); ++i) {
    Scenario s = load_scenario(files[i]);
    if (a.seed_set) s.seed = hash_mix(a.seed, i);
    suite.push_back(std::move(s));
  }

  ComparisonReport rep;
  for (const auto& s : suite) {
    RunResult r = run_scenario(s);
    ScenarioOutcome row;
    row.name = s.name;
    row.truth = s.truth_assistant;
    row.two_way = r.handover_to;
    row.one_way = r.one_way_choice;
    log_info(row.name + ": truth=" + std::to_string(row.truth) + " two_way=" +
             (row.two_way ? std::to_string(*row.two_way) : "-") + " one_way=" +
             (row.one_way ? std::to_string(*row.one_way) : "-"));
    rep.rows.push_back(std::move(row));
  }

  fs::create_directories(a.out_dir);
  fs::path report_path = fs::path(a.out_dir) / "comparison.csv";
  write_file(report_path, comparison_csv(rep));

  int two_ok = 0, one_ok = 0;
  for (const auto& r : rep.rows) {
    two_ok += r.two_way_correct() ? 1 : 0;
    one_ok += r.one_way_correct() ? 1 : 0;
  }
  std::printf("suite: %d scenarios from %s\n", rep.scenarios(), a.suite_dir.c_str());
  std::printf("two-way accuracy: %s (%d/%d)\n", fmt("%.3f", rep.two_way_accuracy()).c_str(),
              two_ok, rep.scenarios());
  std::printf("one-way accuracy: %s (%d/%d)\n", fmt("%.3f", rep.one_way_accuracy()).c_str(),
              one_ok, rep.scenarios());
  std::printf("delta: %s percentage points\n",
              fmt("%+.1f", 100.0 * (rep.two_way_accuracy() - rep.one_way_accuracy())).c_str());
  std::printf("wrote %s\n", report_path.string().c_str());
  return kExitOk;
}

// ---- extract ----

struct ExtractArgs {
  std::string image;
  std::string out;
};

int cmd_extract(const ExtractArgs& a) {
  Frame frame = load_image(a.image);
  FeatureConfig cfg;
  FeatureVector fv = extract_feature(frame, cfg);
  auto bytes = serialize_feature(fv);

  fs::path out = a.out.empty() ? fs::path(a.image + ".feat") : fs::path(a.out);
  write_file(out, std::string(bytes.begin(), bytes.end()));

  std::printf("image: %dx%d, %zu bytes\n", frame.width, frame.height, frame.pixels.size());
  std::printf("feature: dimension %d, config 0x%04x, norm %s\n", int(fv.values.size()),
              unsigned(fv.config_id), fmt("%.9g", fv.values.norm()).c_str());
  std::printf("wrote %s (%zu bytes)\n", out.string().c_str(), bytes.size());
  return kExitOk;
}

// ---- inspect ----

int cmd_inspect(const std::string& path) {
  fs::path p(path);
  if (p.extension() == ".scn") {
    Scenario s = load_scenario(p);
    std::printf("scenario %s: valid\n", s.name.c_str());
    std::printf("  duration %d frames at %s fps, seed %llu\n", s.duration,
                fmt("%g", s.frame_rate).c_str(), (unsigned long long)s.seed);
    for (const auto& sensor : s.sensors)
      std::printf("  sensor %u (%s): fov %gx%g at (%g,%g), gain %g offset %g\n",
                  unsigned(sensor.id),
                  sensor.role == SensorRole::Tracking ? "tracking" : "assistant", sensor.fov.w,
                  sensor.fov.h, sensor.fov.x, sensor.fov.y, sensor.illum.gain,
                  sensor.illum.offset);
    for (const auto& t : s.targets)
      std::printf("  target %d: %gx%g, %zu waypoints\n", t.id, t.width, t.height,
                  t.waypoints.size());
    std::printf("  links: %zu, one-way latency %s s\n", s.links.size(),
                fmt("%.9g", s.total_link_latency_s()).c_str());
    std::printf("  interest target %d, truth assistant %d\n", s.target_of_interest,
                s.truth_assistant);
    return kExitOk;
  }
  Frame f = load_image(p);
  std::printf("image: %dx%d %s, %zu pixel bytes\n", f.width, f.height,
              f.format == PixelFormat::Rgb8 ? "rgb8" : "gray8", f.pixels.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "multi-sensor target handover toolkit: scenario simulation, protocol "
      "benchmarks, re-identification comparison, and feature extraction.\n"
      "set MLAI_LOG=info or MLAI_LOG=debug for stderr diagnostics."};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a scenario and export its event log");
  run->add_option("--scenario", run_args.scenario, "scenario file (.scn)")->required();
  auto* run_seed = run->add_option("--seed", run_args.seed, "override the scenario seed");
  run->add_option("--out", run_args.out_dir, "output directory (default .)");
  run->add_option("--format", run_args.format, "event log format: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "latency-score detect/track requests over a socket");
  bench->add_option("--samples", bench_args.samples, "requests per row (default 100)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--threshold-s", bench_args.threshold_s,
                    "satisfied threshold in seconds (default 0.5)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--inject", bench_args.inject,
                    "skip the live stack and classify synthetic latencies; format "
                    "COUNTxSECONDS[,...], e.g. 97x0.1,3x1.0; 'fail' as SECONDS marks failures");
  bench->add_option("--seed", bench_args.seed, "benchmark scene seed");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare-reid",
                                 "run a scenario suite, compare two-way vs one-way accuracy");
  cmp->add_option("--scenario", cmp_args.suite_dir, "directory of .scn files")->required();
  auto* cmp_seed = cmp->add_option("--seed", cmp_args.seed, "override per-scenario seeds");
  cmp->add_option("--out", cmp_args.out_dir, "output directory (default .)");

  ExtractArgs ext_args;
  auto* ext = app.add_subcommand("extract", "compute the appearance feature of an image");
  ext->add_option("image", ext_args.image, "image file (.mlf1, .ppm, .pgm)")->required();
  ext->add_option("--out", ext_args.out, "feature record path (default IMAGE.feat)");

  std::string inspect_path;
  auto* ins = app.add_subcommand("inspect", "describe a scenario or image file");
  ins->add_option("path", inspect_path, "file to describe (.scn, .mlf1, .ppm, .pgm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the diagnostic
    return kExitUsage;
  }

  run_args.seed_set = run_seed->count() > 0;
  cmp_args.seed_set = cmp_seed->count() > 0;

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (cmp->parsed()) return cmd_compare_reid(cmp_args);
    if (ext->parsed()) return cmd_extract(ext_args);
    if (ins->parsed()) return cmd_inspect(inspect_path);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "mlai: %s\n", e.what());
    return kExitUsage;
  } catch (const ScenarioInvalid& e) {
    std::fprintf(stderr, "mlai: invalid scenario: %s\n", e.what());
    return kExitScenario;
  } catch (const DeadlockError& e) {
    std::fprintf(stderr, "mlai: deadlock: %s\n", e.what());
    return kExitDeadlock;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "mlai: protocol invariant violated: %s\n", e.what());
    return kExitDeadlock;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mlai: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
