#pragma once

// two-way re-identification scoring. the tracking sensor broadcasts probe
// features; each assistant filters its own gallery against the probe and
// returns candidates above the cosine threshold. the tracker back-matches
// every received candidate against its own gallery and keeps two counters
// per (assistant, object): z, the times its target id landed in the top-k of
// the back-match, and t, the candidate receipts. the handover weight is
//   phi = z * t * cosine(probe, candidate)
// and the decision is the assistant holding the arg-max positive phi.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlai/features.hpp"
#include "mlai/types.hpp"

namespace mlai {

struct EmptyGallery : std::runtime_error {
  EmptyGallery() : std::runtime_error("gallery holds no entries") {}
};

struct GalleryEntry {
  ObjectId object_id = 0;
  FeatureVector feature;
  std::int64_t frame_index = 0;
};

struct Gallery {
  std::vector<GalleryEntry> entries;
  std::size_t capacity = 512;  // oldest entries are evicted first
};

// appends unless an entry with the same (object, frame) is already present;
// throws ConfigMismatch when the feature config differs from the gallery's
void gallery_add(Gallery& g, ObjectId object, const FeatureVector& feature,
                 std::int64_t frame_index);

// most recent feature per object id
std::map<ObjectId, FeatureVector> gallery_latest(const Gallery& g);

struct RankedEntry {
  ObjectId object_id = 0;
  double cosine = 0.0;
};

// gallery entries by descending cosine against the probe; ties break toward
// the lower object id, then the older frame. throws EmptyGallery.
std::vector<RankedEntry> rank_gallery(const FeatureVector& probe, const Gallery& g);

struct CandidateHit {
  ObjectId object_id = 0;
  FeatureVector feature;
  double cosine = 0.0;
};

// the assistant side of the exchange: latest feature per object with
// cosine(probe, feature) >= threshold, best first
std::vector<CandidateHit> assistant_filter(const FeatureVector& probe, const Gallery& g,
                                           double threshold = 0.60);

struct MatchEvidence {
  std::int64_t topk_hits = 0;  // z
  std::int64_t receipts = 0;   // t
};

// counts one receipt, plus one top-k hit when target appears within the
// first k ranked entries. z <= t holds by construction.
MatchEvidence count_receipt(MatchEvidence ev, std::span<const RankedEntry> ranked,
                            ObjectId target, int k);

struct HandoverScore {
  SensorId assistant = 0;
  ObjectId object_id = 0;
  double phi = 0.0;
  double cosine = 0.0;
};

HandoverScore weighted_score(const FeatureVector& probe, const FeatureVector& candidate,
                             const MatchEvidence& evidence, SensorId assistant,
                             ObjectId object);

// assistant with the largest positive phi; nullopt when every score is
// non-positive or the list is empty. ties break toward the lower sensor id.
std::optional<SensorId> decide_handover(std::span<const HandoverScore> scores);

// the one-way baseline: the assistant holding the single best cosine match
// above the threshold across all galleries, no evidence weighting
std::optional<SensorId> one_way_decide(const FeatureVector& probe,
                                       const std::map<SensorId, Gallery>& galleries,
                                       double threshold = 0.60);

// wire layout: assistant u16 | object u32 | phi f64 | cosine f64, big-endian
std::vector<std::uint8_t> serialize_score(const HandoverScore& s);
HandoverScore parse_score(std::span<const std::uint8_t> bytes);

}  // namespace mlai
