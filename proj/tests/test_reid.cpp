#include "mlai/reid.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

#include "mlai/rng.hpp"

namespace {

using namespace mlai;

// small synthetic descriptors with hand-controllable geometry; the config id
// only has to be consistent within a test
FeatureVector vec3(double x, double y, double z, std::uint16_t config = 1) {
  FeatureVector f;
  f.values = Eigen::Vector3d(x, y, z).normalized();
  f.config_id = config;
  return f;
}

}  // namespace

TEST_SUITE("reid") {

TEST_CASE("gallery_add dedupes, evicts oldest, and guards the config") {
  Gallery g;
  g.capacity = 3;

  gallery_add(g, 10, vec3(1, 0, 0), 5);
  gallery_add(g, 10, vec3(1, 0, 0), 5);  // same (object, frame): dropped
  CHECK(g.entries.size() == 1);

  gallery_add(g, 10, vec3(1, 0, 0), 6);  // same object, new frame: kept
  CHECK(g.entries.size() == 2);

  gallery_add(g, 11, vec3(0, 1, 0), 7);
  gallery_add(g, 12, vec3(0, 0, 1), 8);  // over capacity: frame 5 falls out
  CHECK(g.entries.size() == 3);
  CHECK(g.entries.front().frame_index == 6);

  CHECK_THROWS_AS(gallery_add(g, 13, vec3(1, 0, 0, 2), 9), ConfigMismatch);
}

TEST_CASE("gallery_latest keeps the newest feature per object") {
  Gallery g;
  gallery_add(g, 1, vec3(1, 0, 0), 2);
  gallery_add(g, 1, vec3(0, 1, 0), 9);
  gallery_add(g, 2, vec3(0, 0, 1), 4);

  auto latest = gallery_latest(g);
  REQUIRE(latest.size() == 2);
  CHECK(latest.at(1).values == vec3(0, 1, 0).values);
  CHECK(latest.at(2).values == vec3(0, 0, 1).values);
}

TEST_CASE("rank_gallery sorts by cosine with deterministic ties") {
  Gallery g;
  gallery_add(g, 5, vec3(1, 0, 0), 10);   // cosine 1 against the probe
  gallery_add(g, 2, vec3(1, 0, 0), 20);   // cosine 1, lower id wins the tie
  gallery_add(g, 9, vec3(0.8, 0.6, 0), 1);
  gallery_add(g, 1, vec3(0, 1, 0), 1);    // orthogonal, ranks last

  auto ranked = rank_gallery(vec3(1, 0, 0), g);
  REQUIRE(ranked.size() == 4);
  CHECK(ranked[0].object_id == 2);
  CHECK(ranked[1].object_id == 5);
  CHECK(ranked[2].object_id == 9);
  CHECK(ranked[3].object_id == 1);
  CHECK(ranked[0].cosine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ranked[2].cosine == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(ranked[3].cosine == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(rank_gallery(vec3(1, 0, 0), Gallery{}), EmptyGallery);
}

TEST_CASE("assistant_filter returns per-object hits above the threshold") {
  Gallery g;
  gallery_add(g, 1, vec3(0.2, 0.98, 0), 1);  // early look, weak match
  gallery_add(g, 1, vec3(0.9, 0.435, 0), 8); // newest per object is what counts
  gallery_add(g, 2, vec3(0.7, 0.714, 0), 3);
  gallery_add(g, 3, vec3(0, 0, 1), 5);

  auto hits = assistant_filter(vec3(1, 0, 0), g, 0.60);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].object_id == 1);
  CHECK(hits[1].object_id == 2);
  CHECK(hits[0].cosine > hits[1].cosine);
  CHECK(hits[0].cosine >= 0.60);

  // a cosine exactly at the threshold counts as a hit
  Gallery edge;
  gallery_add(edge, 7, vec3(0.8, 0.6, 0), 1);
  double at = cosine_similarity(vec3(1, 0, 0), edge.entries.front().feature);
  CHECK(assistant_filter(vec3(1, 0, 0), edge, at).size() == 1);
  CHECK(assistant_filter(vec3(1, 0, 0), edge, std::nextafter(at, 2.0)).empty());
}

TEST_CASE("count_receipt counts ranked entries, not distinct objects") {
  // two looks at a distractor occupy the whole top-2, even though the target
  // is the second-best distinct object
  std::vector<RankedEntry> ranked = {{8, 0.9}, {8, 0.8}, {3, 0.7}};

  MatchEvidence ev;
  ev = count_receipt(ev, ranked, 3, 2);
  CHECK(ev.receipts == 1);
  CHECK(ev.topk_hits == 0);

  ev = count_receipt(ev, ranked, 3, 3);
  CHECK(ev.receipts == 2);
  CHECK(ev.topk_hits == 1);

  // k beyond the list length is harmless
  ev = count_receipt(ev, ranked, 3, 50);
  CHECK(ev.topk_hits == 2);
  CHECK(ev.topk_hits <= ev.receipts);
}

TEST_CASE("evidence counters never let hits outrun receipts") {
  Rng rng(41);
  std::vector<RankedEntry> ranked;
  for (int i = 0; i < 6; ++i) ranked.push_back({ObjectId(rng.below(4)), 1.0 - 0.1 * i});

  MatchEvidence ev;
  for (int i = 0; i < 100; ++i) {
    ev = count_receipt(ev, ranked, ObjectId(rng.below(5)), rng.uniform_int(1, 8));
    CHECK(ev.topk_hits <= ev.receipts);
    CHECK(ev.receipts == i + 1);
  }
}

TEST_CASE("weighted_score multiplies hits, receipts, and cosine") {
  FeatureVector probe = vec3(1, 0, 0);
  FeatureVector cand = vec3(0.8, 0.6, 0);
  MatchEvidence ev{2, 5};

  HandoverScore s = weighted_score(probe, cand, ev, 4, 77);
  CHECK(s.assistant == 4);
  CHECK(s.object_id == 77);
  CHECK(s.cosine == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(s.phi == 10.0 * s.cosine);

  MatchEvidence none{0, 5};
  CHECK(weighted_score(probe, cand, none, 4, 77).phi == 0.0);
}

TEST_CASE("decide_handover takes the best positive score") {
  std::vector<HandoverScore> scores = {
      {3, 1, 12.0, 0.8}, {1, 2, 40.0, 0.9}, {2, 3, 40.0, 0.7}};
  CHECK(decide_handover(scores) == SensorId(1));  // tie at 40 goes to sensor 1

  std::vector<HandoverScore> negative = {{3, 1, 0.0, 0.8}, {1, 2, -5.0, 0.9}};
  CHECK(decide_handover(negative) == std::nullopt);
  CHECK(decide_handover({}) == std::nullopt);
}

TEST_CASE("one_way_decide picks the single best cosine above threshold") {
  std::map<SensorId, Gallery> galleries;
  gallery_add(galleries[1], 10, vec3(0.7, 0.714, 0), 1);
  gallery_add(galleries[2], 20, vec3(0.95, 0.312, 0), 1);
  gallery_add(galleries[3], 30, vec3(0, 1, 0), 1);

  FeatureVector probe = vec3(1, 0, 0);
  CHECK(one_way_decide(probe, galleries, 0.60) == SensorId(2));
  CHECK(one_way_decide(probe, galleries, 0.999) == std::nullopt);

  // identical best matches tie toward the lower sensor id
  std::map<SensorId, Gallery> tied;
  gallery_add(tied[4], 1, vec3(1, 0, 0), 1);
  gallery_add(tied[2], 1, vec3(1, 0, 0), 1);
  CHECK(one_way_decide(probe, tied, 0.60) == SensorId(2));

  CHECK(one_way_decide(probe, {}, 0.60) == std::nullopt);
}

TEST_CASE("score records roundtrip") {
  HandoverScore s{7, 42, 80.891234, 0.8089};
  auto bytes = serialize_score(s);
  CHECK(bytes.size() == 22);

  HandoverScore back = parse_score(bytes);
  CHECK(back.assistant == 7);
  CHECK(back.object_id == 42);
  CHECK(back.phi == s.phi);
  CHECK(back.cosine == s.cosine);
}

}  // TEST_SUITE
