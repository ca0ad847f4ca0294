#include "mlai/reid.hpp"

#include <algorithm>

#include "mlai/wire.hpp"

namespace mlai {

void gallery_add(Gallery& g, ObjectId object, const FeatureVector& feature,
                 std::int64_t frame_index) {
  if (!g.entries.empty() && g.entries.front().feature.config_id != feature.config_id)
    throw ConfigMismatch("gallery holds features from a different config");
  for (const auto& e : g.entries)
    if (e.object_id == object && e.frame_index == frame_index) return;
  g.entries.push_back({object, feature, frame_index});
  while (g.entries.size() > g.capacity) g.entries.erase(g.entries.begin());
}

std::map<ObjectId, FeatureVector> gallery_latest(const Gallery& g) {
  std::map<ObjectId, std::int64_t> newest;
  std::map<ObjectId, FeatureVector> out;
  for (const auto& e : g.entries) {
    auto it = newest.find(e.object_id);
    if (it == newest.end() || e.frame_index >= it->second) {
      newest[e.object_id] = e.frame_index;
      out[e.object_id] = e.feature;
    }
  }
  return out;
}

std::vector<RankedEntry> rank_gallery(const FeatureVector& probe, const Gallery& g) {
  if (g.entries.empty()) throw EmptyGallery{};
  struct Row {
    ObjectId object;
    std::int64_t frame;
    double cosine;
  };
  std::vector<Row> rows;
  rows.reserve(g.entries.size());
  for (const auto& e : g.entries)
    rows.push_back({e.object_id, e.frame_index, cosine_similarity(probe, e.feature)});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    if (a.object != b.object) return a.object < b.object;
    return a.frame < b.frame;
  });
  std::vector<RankedEntry> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.object, r.cosine});
  return out;
}

std::vector<CandidateHit> assistant_filter(const FeatureVector& probe, const Gallery& g,
                                           double threshold) {
  std::vector<CandidateHit> out;
  for (const auto& [object, feature] : gallery_latest(g)) {
    double c = cosine_similarity(probe, feature);
    if (c >= threshold) out.push_back({object, feature, c});
  }
  std::stable_sort(out.begin(), out.end(), [](const CandidateHit& a, const CandidateHit& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.object_id < b.object_id;
  });
  return out;
}

MatchEvidence count_receipt(MatchEvidence ev, std::span<const RankedEntry> ranked,
                            ObjectId target, int k) {
  ev.receipts += 1;
  std::int64_t limit = std::min<std::int64_t>(k, std::int64_t(ranked.size()));
  for (std::int64_t i = 0; i < limit; ++i) {
    if (ranked[std::size_t(i)].object_id == target) {
      ev.topk_hits += 1;
      break;
    }
  }
  return ev;
}

HandoverScore weighted_score(const FeatureVector& probe, const FeatureVector& candidate,
                             const MatchEvidence& evidence, SensorId assistant,
                             ObjectId object) {
  HandoverScore s;
  s.assistant = assistant;
  s.object_id = object;
  s.cosine = cosine_similarity(probe, candidate);
  s.phi = double(evidence.topk_hits) * double(evidence.receipts) * s.cosine;
  return s;
}

std::optional<SensorId> decide_handover(std::span<const HandoverScore> scores) {
  const HandoverScore* best = nullptr;
  for (const auto& s : scores) {
    if (s.phi <= 0.0) continue;
    if (!best || s.phi > best->phi ||
        (s.phi == best->phi && s.assistant < best->assistant)) {
      best = &s;
    }
  }
  if (!best) return std::nullopt;
  return best->assistant;
}

std::optional<SensorId> one_way_decide(const FeatureVector& probe,
                                       const std::map<SensorId, Gallery>& galleries,
                                       double threshold) {
  std::optional<SensorId> best;
  double best_cosine = threshold;
  for (const auto& [sensor, gallery] : galleries) {
    for (const auto& [object, feature] : gallery_latest(gallery)) {
      double c = cosine_similarity(probe, feature);
      // >= so a hit exactly at threshold counts; > keeps the first (lowest
      // sensor id) on exact ties
      if ((!best && c >= best_cosine) || (best && c > best_cosine)) {
        best = sensor;
        best_cosine = c;
      }
    }
  }
  return best;
}

std::vector<std::uint8_t> serialize_score(const HandoverScore& s) {
  std::vector<std::uint8_t> out;
  wire::put_u16(out, s.assistant);
  wire::put_u32(out, s.object_id);
  wire::put_f64(out, s.phi);
  wire::put_f64(out, s.cosine);
  return out;
}

HandoverScore parse_score(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  HandoverScore s;
  s.assistant = r.u16();
  s.object_id = r.u32();
  s.phi = r.f64();
  s.cosine = r.f64();
  return s;
}

}  // namespace mlai
