#include "mlai/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mlai/rng.hpp"

namespace mlai {

double link_latency_s(LinkKind k) {
  switch (k) {
    case LinkKind::Wireless: return 0.004;
    case LinkKind::Usb: return 0.001;
    case LinkKind::Wifi: return 0.003;
    case LinkKind::Hdmi: return 0.002;
  }
  return 0.0;
}

double Scenario::total_link_latency_s() const {
  double total = 0.0;
  for (const auto& l : links) total += link_latency_s(l.kind);
  return total;
}

Eigen::Vector2d target_position(const TargetSpec& t, double frame) {
  if (t.waypoints.empty()) throw ScenarioInvalid("target " + std::to_string(t.id) + " has no waypoints");
  const auto& w = t.waypoints;
  if (frame <= w.front().frame) return {w.front().x, w.front().y};
  if (frame >= w.back().frame) return {w.back().x, w.back().y};
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (frame <= w[i].frame) {
      double span = w[i].frame - w[i - 1].frame;
      double u = span > 0.0 ? (frame - w[i - 1].frame) / span : 1.0;
      return {w[i - 1].x + u * (w[i].x - w[i - 1].x), w[i - 1].y + u * (w[i].y - w[i - 1].y)};
    }
  }
  return {w.back().x, w.back().y};
}

// ---- enum names ----

namespace {

const std::map<std::string, SensorRole> kRoles = {
    {"tracking", SensorRole::Tracking}, {"assistant", SensorRole::Assistant}};
const std::map<std::string, LinkKind> kLinks = {{"wireless", LinkKind::Wireless},
                                                {"usb", LinkKind::Usb},
                                                {"wifi", LinkKind::Wifi},
                                                {"hdmi", LinkKind::Hdmi}};
const std::map<std::string, PatternKind> kPatterns = {{"stripes", PatternKind::Stripes},
                                                      {"checker", PatternKind::Checker},
                                                      {"solid", PatternKind::Solid}};

template <class T>
std::string enum_name(const std::map<std::string, T>& table, T v) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

template <class T>
T enum_value(const std::map<std::string, T>& table, const std::string& name,
             const std::string& what) {
  auto it = table.find(name);
  if (it == table.end()) throw ScenarioInvalid("unknown " + what + " '" + name + "'");
  return it->second;
}

// shortest decimal form that parses back to the same double
std::string fmt_exact(double v) {
  char buf[40];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

[[noreturn]] void bad_line(int line_no, const std::string& msg) {
  throw ScenarioInvalid("line " + std::to_string(line_no) + ": " + msg);
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) bad_line(line_no, "trailing characters in number '" + s + "'");
    return v;
  } catch (const ScenarioInvalid&) {
    throw;
  } catch (const std::exception&) {
    bad_line(line_no, "expected a number, got '" + s + "'");
  }
}

long long parse_int(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) bad_line(line_no, "trailing characters in integer '" + s + "'");
    return v;
  } catch (const ScenarioInvalid&) {
    throw;
  } catch (const std::exception&) {
    bad_line(line_no, "expected an integer, got '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) bad_line(line_no, "trailing characters in integer '" + s + "'");
    return v;
  } catch (const ScenarioInvalid&) {
    throw;
  } catch (const std::exception&) {
    bad_line(line_no, "expected an unsigned integer, got '" + s + "'");
  }
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, std::size_t n, int line_no) {
  auto parts = split_csv(s);
  if (parts.size() != n)
    bad_line(line_no, "expected " + std::to_string(n) + " comma-separated values, got '" + s + "'");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_double(p, line_no));
  return out;
}

std::array<std::uint8_t, 3> parse_color(const std::string& s, int line_no) {
  auto v = parse_doubles(s, 3, line_no);
  std::array<std::uint8_t, 3> c{};
  for (int i = 0; i < 3; ++i) {
    if (v[std::size_t(i)] < 0 || v[std::size_t(i)] > 255 ||
        v[std::size_t(i)] != std::floor(v[std::size_t(i)]))
      bad_line(line_no, "color channels must be integers in [0, 255]");
    c[std::size_t(i)] = std::uint8_t(v[std::size_t(i)]);
  }
  return c;
}

struct KvList {
  std::vector<std::pair<std::string, std::string>> items;
  int line_no;

  // every key must be consumed exactly once
  std::string take(const std::string& key) {
    for (auto it = items.begin(); it != items.end(); ++it) {
      if (it->first == key) {
        std::string v = it->second;
        items.erase(it);
        return v;
      }
    }
    bad_line(line_no, "missing key '" + key + "'");
  }

  std::optional<std::string> take_opt(const std::string& key) {
    for (auto it = items.begin(); it != items.end(); ++it) {
      if (it->first == key) {
        std::string v = it->second;
        items.erase(it);
        return v;
      }
    }
    return std::nullopt;
  }

  void finish(const std::string& directive) {
    if (!items.empty())
      bad_line(line_no, "unknown key '" + items.front().first + "' for '" + directive + "'");
  }
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  bool saw_duration = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string directive;
    if (!(ls >> directive)) continue;

    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);

    auto positional = [&](std::size_t n) -> const std::vector<std::string>& {
      if (tokens.size() != n)
        bad_line(line_no, "'" + directive + "' expects " + std::to_string(n) + " value(s)");
      return tokens;
    };
    auto kv = [&]() {
      KvList list;
      list.line_no = line_no;
      for (const auto& t : tokens) {
        auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
          bad_line(line_no, "expected key=value, got '" + t + "'");
        list.items.emplace_back(t.substr(0, eq), t.substr(eq + 1));
      }
      return list;
    };

    if (directive == "name") {
      s.name = positional(1)[0];
    } else if (directive == "seed") {
      s.seed = parse_u64(positional(1)[0], line_no);
    } else if (directive == "duration") {
      s.duration = int(parse_int(positional(1)[0], line_no));
      saw_duration = true;
    } else if (directive == "rate") {
      s.frame_rate = parse_double(positional(1)[0], line_no);
    } else if (directive == "home") {
      auto& p = positional(2);
      s.home = {parse_double(p[0], line_no), parse_double(p[1], line_no)};
    } else if (directive == "sim") {
      auto list = kv();
      if (auto v = list.take_opt("lost_after")) s.sim.lost_after = int(parse_int(*v, line_no));
      if (auto v = list.take_opt("patience")) s.sim.patience = int(parse_int(*v, line_no));
      if (auto v = list.take_opt("giveup")) s.sim.giveup = int(parse_int(*v, line_no));
      if (auto v = list.take_opt("min_receipts")) s.sim.min_receipts = int(parse_int(*v, line_no));
      if (auto v = list.take_opt("max_missed")) s.sim.max_missed = int(parse_int(*v, line_no));
      if (auto v = list.take_opt("max_dist")) s.sim.max_dist = parse_double(*v, line_no);
      if (auto v = list.take_opt("stream_frames")) s.sim.stream_frames = parse_int(*v, line_no) != 0;
      list.finish(directive);
    } else if (directive == "reid") {
      auto list = kv();
      if (auto v = list.take_opt("threshold")) s.reid.threshold = parse_double(*v, line_no);
      if (auto v = list.take_opt("k")) s.reid.k = int(parse_int(*v, line_no));
      list.finish(directive);
    } else if (directive == "noise") {
      auto list = kv();
      if (auto v = list.take_opt("pos_sigma")) s.noise.pos_sigma = parse_double(*v, line_no);
      if (auto v = list.take_opt("size_sigma")) s.noise.size_sigma = parse_double(*v, line_no);
      if (auto v = list.take_opt("miss_rate")) s.noise.miss_rate = parse_double(*v, line_no);
      if (auto v = list.take_opt("fp_rate")) s.noise.false_positive_rate = parse_double(*v, line_no);
      if (auto v = list.take_opt("objectness_sigma"))
        s.noise.objectness_sigma = parse_double(*v, line_no);
      list.finish(directive);
    } else if (directive == "sensor") {
      auto list = kv();
      SensorSpec sensor;
      sensor.id = SensorId(parse_int(list.take("id"), line_no));
      sensor.role = enum_value(kRoles, list.take("role"), "sensor role");
      auto fov = parse_doubles(list.take("fov"), 4, line_no);
      sensor.fov = {fov[0], fov[1], fov[2], fov[3]};
      auto geo = parse_doubles(list.take("geo"), 2, line_no);
      sensor.anchor = {geo[0], geo[1]};
      if (auto v = list.take_opt("alt")) sensor.altitude = parse_double(*v, line_no);
      if (auto v = list.take_opt("illum")) {
        auto il = parse_doubles(*v, 2, line_no);
        sensor.illum = {il[0], il[1]};
      }
      list.finish(directive);
      s.sensors.push_back(sensor);
    } else if (directive == "target") {
      auto list = kv();
      TargetSpec t;
      t.id = int(parse_int(list.take("id"), line_no));
      if (auto v = list.take_opt("label")) t.label = int(parse_int(*v, line_no));
      auto size = parse_doubles(list.take("size"), 2, line_no);
      t.width = size[0];
      t.height = size[1];
      t.proto.pattern = enum_value(kPatterns, list.take("pattern"), "pattern");
      if (auto v = list.take_opt("proto_seed")) t.proto.seed = parse_u64(*v, line_no);
      t.proto.color1 = parse_color(list.take("c1"), line_no);
      t.proto.color2 = parse_color(list.take("c2"), line_no);
      if (auto v = list.take_opt("period")) t.proto.period = int(parse_int(*v, line_no));
      list.finish(directive);
      s.targets.push_back(std::move(t));
    } else if (directive == "waypoint") {
      auto list = kv();
      int id = int(parse_int(list.take("target"), line_no));
      double frame = parse_double(list.take("frame"), line_no);
      auto pos = parse_doubles(list.take("pos"), 2, line_no);
      list.finish(directive);
      auto it = std::find_if(s.targets.begin(), s.targets.end(),
                             [id](const TargetSpec& t) { return t.id == id; });
      if (it == s.targets.end())
        bad_line(line_no, "waypoint for undeclared target " + std::to_string(id));
      it->waypoints.push_back({frame, pos[0], pos[1]});
    } else if (directive == "link") {
      auto list = kv();
      LinkSpec l;
      l.from = list.take("from");
      l.to = list.take("to");
      l.kind = enum_value(kLinks, list.take("kind"), "link kind");
      list.finish(directive);
      s.links.push_back(std::move(l));
    } else if (directive == "interest") {
      auto list = kv();
      s.target_of_interest = int(parse_int(list.take("target"), line_no));
      list.finish(directive);
    } else if (directive == "truth") {
      auto list = kv();
      s.truth_assistant = int(parse_int(list.take("assistant"), line_no));
      list.finish(directive);
    } else {
      bad_line(line_no, "unknown directive '" + directive + "'");
    }
  }
  if (!saw_duration) throw ScenarioInvalid("scenario declares no duration");
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioInvalid("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioInvalid& e) {
    throw ScenarioInvalid(path.string() + ": " + e.what());
  }
}

std::string write_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "# scenario " << s.name << "\n";
  out << "name " << s.name << "\n";
  out << "seed " << s.seed << "\n";
  out << "duration " << s.duration << "\n";
  out << "rate " << fmt_exact(s.frame_rate) << "\n";
  out << "home " << fmt_exact(s.home.latitude) << " " << fmt_exact(s.home.longitude) << "\n";
  out << "sim lost_after=" << s.sim.lost_after << " patience=" << s.sim.patience
      << " giveup=" << s.sim.giveup << " min_receipts=" << s.sim.min_receipts
      << " max_missed=" << s.sim.max_missed << " max_dist=" << fmt_exact(s.sim.max_dist)
      << " stream_frames=" << (s.sim.stream_frames ? 1 : 0) << "\n";
  out << "reid threshold=" << fmt_exact(s.reid.threshold) << " k=" << s.reid.k << "\n";
  out << "noise pos_sigma=" << fmt_exact(s.noise.pos_sigma)
      << " size_sigma=" << fmt_exact(s.noise.size_sigma)
      << " miss_rate=" << fmt_exact(s.noise.miss_rate)
      << " fp_rate=" << fmt_exact(s.noise.false_positive_rate)
      << " objectness_sigma=" << fmt_exact(s.noise.objectness_sigma) << "\n";
  for (const auto& sensor : s.sensors) {
    out << "sensor id=" << sensor.id << " role=" << enum_name(kRoles, sensor.role) << " fov="
        << fmt_exact(sensor.fov.x) << "," << fmt_exact(sensor.fov.y) << ","
        << fmt_exact(sensor.fov.w) << "," << fmt_exact(sensor.fov.h) << " geo="
        << fmt_exact(sensor.anchor.latitude) << "," << fmt_exact(sensor.anchor.longitude)
        << " alt=" << fmt_exact(sensor.altitude) << " illum=" << fmt_exact(sensor.illum.gain)
        << "," << fmt_exact(sensor.illum.offset) << "\n";
  }
  for (const auto& t : s.targets) {
    out << "target id=" << t.id << " label=" << t.label << " size=" << fmt_exact(t.width) << ","
        << fmt_exact(t.height) << " pattern=" << enum_name(kPatterns, t.proto.pattern)
        << " proto_seed=" << t.proto.seed << " c1=" << int(t.proto.color1[0]) << ","
        << int(t.proto.color1[1]) << "," << int(t.proto.color1[2]) << " c2="
        << int(t.proto.color2[0]) << "," << int(t.proto.color2[1]) << ","
        << int(t.proto.color2[2]) << " period=" << t.proto.period << "\n";
    for (const auto& w : t.waypoints) {
      out << "waypoint target=" << t.id << " frame=" << fmt_exact(w.frame) << " pos="
          << fmt_exact(w.x) << "," << fmt_exact(w.y) << "\n";
    }
  }
  for (const auto& l : s.links)
    out << "link from=" << l.from << " to=" << l.to << " kind=" << enum_name(kLinks, l.kind)
        << "\n";
  if (s.target_of_interest >= 0) out << "interest target=" << s.target_of_interest << "\n";
  if (s.truth_assistant >= 0) out << "truth assistant=" << s.truth_assistant << "\n";
  return out.str();
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << write_scenario(s);
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw ScenarioInvalid(msg); };

  if (s.duration < 1) fail("duration must be at least 1 frame");
  if (!(s.frame_rate > 0.0)) fail("frame rate must be positive");

  if (s.sensors.empty()) fail("scenario declares no sensors");
  std::set<SensorId> sensor_ids;
  int tracking = 0;
  for (const auto& sensor : s.sensors) {
    if (!sensor_ids.insert(sensor.id).second)
      fail("duplicate sensor id " + std::to_string(sensor.id));
    if (sensor.id == 0xFFFF) fail("sensor id 65535 is reserved for the hub");
    if (sensor.role == SensorRole::Tracking) ++tracking;
    if (sensor.fov.w < 16.0 || sensor.fov.h < 16.0)
      fail("sensor " + std::to_string(sensor.id) + " field of view is too small");
    if (!(sensor.illum.gain >= 0.0))
      fail("sensor " + std::to_string(sensor.id) + " illumination gain must be >= 0");
  }
  if (tracking != 1)
    fail("scenario needs exactly one tracking sensor, found " + std::to_string(tracking));

  if (s.targets.empty()) fail("scenario declares no targets");
  std::set<int> target_ids;
  for (const auto& t : s.targets) {
    if (!target_ids.insert(t.id).second) fail("duplicate target id " + std::to_string(t.id));
    if (t.width < 8.0 || t.height < 8.0)
      fail("target " + std::to_string(t.id) + " must be at least 8x8 pixels");
    if (t.proto.period < 1) fail("target " + std::to_string(t.id) + " pattern period must be >= 1");
    if (t.waypoints.empty()) fail("target " + std::to_string(t.id) + " has no waypoints");
    for (std::size_t i = 1; i < t.waypoints.size(); ++i)
      if (!(t.waypoints[i].frame > t.waypoints[i - 1].frame))
        fail("target " + std::to_string(t.id) + " waypoint frames must be strictly increasing");
  }

  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (s.noise.pos_sigma < 0.0 || s.noise.size_sigma < 0.0 || s.noise.objectness_sigma < 0.0)
    fail("noise sigmas must be >= 0");
  if (!rate_ok(s.noise.miss_rate) || !rate_ok(s.noise.false_positive_rate))
    fail("noise rates must be in [0, 1]");

  if (s.reid.threshold < -1.0 || s.reid.threshold > 1.0)
    fail("reid threshold must be in [-1, 1]");
  if (s.reid.k < 1) fail("reid k must be >= 1");

  if (s.sim.lost_after < 1) fail("sim lost_after must be >= 1");
  if (s.sim.patience < 1) fail("sim patience must be >= 1");
  if (s.sim.giveup <= s.sim.patience) fail("sim giveup must exceed patience");
  if (s.sim.min_receipts < 1) fail("sim min_receipts must be >= 1");
  if (s.sim.max_missed < 1) fail("sim max_missed must be >= 1");
  if (!(s.sim.max_dist > 0.0)) fail("sim max_dist must be positive");

  if (s.target_of_interest < 0) fail("scenario declares no target of interest");
  if (!target_ids.count(s.target_of_interest))
    fail("target of interest " + std::to_string(s.target_of_interest) + " is not declared");

  if (s.truth_assistant >= 0) {
    auto it = std::find_if(s.sensors.begin(), s.sensors.end(), [&](const SensorSpec& x) {
      return int(x.id) == s.truth_assistant;
    });
    if (it == s.sensors.end())
      fail("truth assistant " + std::to_string(s.truth_assistant) + " is not declared");
    if (it->role != SensorRole::Assistant)
      fail("truth assistant " + std::to_string(s.truth_assistant) + " is not an assistant");
  }

  for (const auto& l : s.links)
    if (l.from.empty() || l.to.empty()) fail("link endpoints must be named");
}

// ---- benchmark suite generation ----

namespace {

std::array<std::uint8_t, 3> jitter_color(Rng& rng, std::array<std::uint8_t, 3> c, int amount) {
  for (auto& ch : c) {
    int v = int(ch) + rng.uniform_int(-amount, amount);
    ch = std::uint8_t(std::clamp(v, 0, 255));
  }
  return c;
}

}  // namespace

std::vector<Scenario> make_benchmark_suite(const SuiteOptions& opts) {
  std::vector<Scenario> out;
  out.reserve(std::size_t(opts.count));
  for (int i = 0; i < opts.count; ++i) {
    Rng rng(hash_mix(opts.base_seed, std::uint64_t(i)));
    Scenario s;
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03d", opts.name_prefix.c_str(), i);
    s.name = name;
    s.seed = hash_mix(opts.base_seed, 0x7777ULL + std::uint64_t(i));
    s.duration = 90;
    s.frame_rate = 20.0;
    s.home = {46.048, 14.504};
    s.noise = {0.4, 0.3, 0.03, 0.0, 0.0};
    s.reid = {0.60, 20};

    const RectF tracker_fov{0, 0, 192, 144};
    const RectF a_fov{260, 0, 192, 144};
    const RectF b_fov{260, 200, 192, 144};

    SensorSpec tracker{0, SensorRole::Tracking, tracker_fov, {46.0480, 14.5040}, 30.0, {1.0, 0.0}};
    SensorSpec assist_a{1, SensorRole::Assistant, a_fov, {46.0486, 14.5051}, 31.0,
                        {rng.uniform(0.80, 1.20), rng.uniform(-10.0, 10.0)}};
    SensorSpec assist_b{2, SensorRole::Assistant, b_fov, {46.0471, 14.5047}, 32.0,
                        {rng.uniform(0.80, 1.20), rng.uniform(-10.0, 10.0)}};
    s.sensors = {tracker, assist_a, assist_b};

    bool truth_is_a = rng.chance(0.5);
    s.truth_assistant = truth_is_a ? 1 : 2;
    const RectF& truth_fov = truth_is_a ? a_fov : b_fov;
    const RectF& wrong_fov = truth_is_a ? b_fov : a_fov;

    TargetSpec target;
    target.id = 1;
    target.label = 0;
    target.width = rng.uniform(18.0, 26.0);
    target.height = target.width * rng.uniform(1.7, 2.1);
    target.proto.pattern = rng.chance(0.5) ? PatternKind::Stripes : PatternKind::Checker;
    target.proto.seed = rng.below(1000000);
    target.proto.period = rng.uniform_int(5, 9);
    target.proto.color1 = {std::uint8_t(rng.uniform_int(150, 255)),
                           std::uint8_t(rng.uniform_int(30, 110)),
                           std::uint8_t(rng.uniform_int(30, 110))};
    target.proto.color2 = {std::uint8_t(rng.uniform_int(190, 255)),
                           std::uint8_t(rng.uniform_int(170, 240)),
                           std::uint8_t(rng.uniform_int(40, 120))};

    int lose = rng.uniform_int(30, 38);
    int arrive = lose + rng.uniform_int(4, 7);
    double start_y = rng.uniform(56.0, 90.0);
    double entry_y = truth_fov.y + rng.uniform(60.0, 84.0);
    target.waypoints = {
        {0.0, rng.uniform(60.0, 110.0), start_y},
        {double(lose), 186.0, start_y},
        {double(arrive), truth_fov.x + 30.0, entry_y},
        {double(s.duration), truth_fov.x + rng.uniform(120.0, 160.0),
         truth_fov.y + rng.uniform(50.0, 90.0)},
    };
    s.targets.push_back(target);

    if (opts.with_distractor) {
      bool hard = rng.uniform01() < 0.6;
      TargetSpec d;
      d.id = 2;
      d.label = 0;
      d.width = std::clamp(target.width + rng.uniform(-3.0, 3.0), 16.0, 30.0);
      d.height = d.width * rng.uniform(1.7, 2.1);
      // keep the color mass close to the target so single-shot cosine cannot
      // separate them; the medium cases shift one hue so it can
      d.proto.pattern = target.proto.pattern == PatternKind::Stripes ? PatternKind::Checker
                                                                     : PatternKind::Stripes;
      d.proto.seed = rng.below(1000000);
      d.proto.period = rng.uniform_int(5, 9);
      if (hard) {
        d.proto.color1 = jitter_color(rng, target.proto.color1, 10);
        d.proto.color2 = jitter_color(rng, target.proto.color2, 10);
      } else {
        d.proto.color1 = target.proto.color1;
        d.proto.color1[1] = std::uint8_t(std::clamp(int(d.proto.color1[1]) + 70, 0, 255));
        d.proto.color2 = jitter_color(rng, target.proto.color2, 10);
      }
      int enter = arrive + rng.uniform_int(3, 5);
      int leave = enter + rng.uniform_int(12, 16);
      double dy = wrong_fov.y + rng.uniform(56.0, 88.0);
      // enters from the right edge, sweeps left, and exits into the gap
      // between the tracker and the assistants, staying there
      d.waypoints = {
          {0.0, 540.0, 172.0},
          {double(enter - 2), wrong_fov.x + wrong_fov.w + 8.0, dy},
          {double(enter), wrong_fov.x + wrong_fov.w - 24.0, dy},
          {double(leave), wrong_fov.x + 40.0, dy},
          {double(leave + 2), wrong_fov.x - 20.0, dy},
          {double(s.duration), 236.0, dy},
      };
      s.targets.push_back(d);
    }

    s.links = {{"uav0", "rc0", LinkKind::Wireless},
               {"rc0", "phone0", LinkKind::Usb},
               {"phone0", "hub0", LinkKind::Wifi}};
    s.target_of_interest = 1;

    validate_scenario(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mlai
