#include "mlai/tracking.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlai/rng.hpp"

namespace {

using namespace mlai;

// exhaustive assignment search mirroring the production ordering: most
// matches, then least cost, then lexicographically smallest choices with
// "unmatched" sorting after every real column
struct OracleBest {
  int matched = -1;
  double cost = 0.0;
  std::vector<int> choice;
};

bool oracle_better(int matched, double cost, const std::vector<int>& choice,
                   const OracleBest& best, int cols) {
  if (matched != best.matched) return matched > best.matched;
  if (cost != best.cost) return cost < best.cost;
  auto key = [cols](int j) { return j < 0 ? cols : j; };
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (choice[i] != best.choice[i]) return key(choice[i]) < key(best.choice[i]);
  }
  return false;
}

void oracle_search(const Eigen::MatrixXd& dist, double max_dist, std::size_t row,
                   std::vector<int>& choice, std::vector<char>& used, int matched,
                   double cost, OracleBest& best) {
  if (row == std::size_t(dist.rows())) {
    if (best.matched < 0 || oracle_better(matched, cost, choice, best, int(dist.cols()))) {
      best = {matched, cost, choice};
    }
    return;
  }
  for (int j = 0; j < dist.cols(); ++j) {
    if (used[j] || !(dist(Eigen::Index(row), j) <= max_dist)) continue;
    used[j] = 1;
    choice[row] = j;
    oracle_search(dist, max_dist, row + 1, choice, used, matched + 1,
                  cost + dist(Eigen::Index(row), j), best);
    used[j] = 0;
  }
  choice[row] = -1;
  oracle_search(dist, max_dist, row + 1, choice, used, matched, cost, best);
}

std::vector<int> oracle_assignment(const Eigen::MatrixXd& dist, double max_dist) {
  OracleBest best;
  std::vector<int> choice(std::size_t(dist.rows()), -1);
  std::vector<char> used(std::size_t(dist.cols()), 0);
  oracle_search(dist, max_dist, 0, choice, used, 0, 0.0, best);
  return best.choice;
}

Detection det_at(double cx, double cy) {
  Detection d;
  d.box = {cx, cy, 10.0, 10.0};
  d.objectness = 0.9;
  return d;
}

// gray frame with a bright square target on a flat background
Frame blob_frame(double cx, double cy, int side = 12) {
  Frame f = Frame::gray(96, 96);
  for (auto& p : f.pixels) p = 40;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (std::abs(x + 0.5 - cx) <= side / 2.0 && std::abs(y + 0.5 - cy) <= side / 2.0)
        f.at(x, y) = 220;
    }
  }
  return f;
}

double max_abs_diff(const Eigen::ArrayXXcd& a, const Eigen::ArrayXXcd& b) {
  return (a - b).abs().maxCoeff();
}

}  // namespace

TEST_SUITE("tracking") {

TEST_CASE("exact assignment matches an exhaustive oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    int n = rng.uniform_int(0, 4);
    int m = rng.uniform_int(0, 4);
    Eigen::MatrixXd dist(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) dist(i, j) = double(rng.uniform_int(1, 5));
    double gate = 3.5;  // leaves distances 4 and 5 infeasible
    CHECK(min_cost_assignment(dist, gate) == oracle_assignment(dist, gate));
  }
}

TEST_CASE("exact assignment beats greedy on the crossing case") {
  // greedy grabs the single cheapest edge and pays for it on the other row
  Eigen::MatrixXd dist(2, 2);
  dist << 2.0, 5.0,
          1.0, 2.0;
  auto exact = min_cost_assignment(dist, 60.0);
  auto greedy = greedy_assignment(dist, 60.0);
  CHECK(exact == std::vector<int>{0, 1});   // total 4
  CHECK(greedy == std::vector<int>{1, 0});  // total 6
}

TEST_CASE("assignment respects the distance gate") {
  Eigen::MatrixXd dist(2, 2);
  dist << 1.0, 100.0,
          100.0, 100.0;
  auto out = min_cost_assignment(dist, 50.0);
  CHECK(out == std::vector<int>{0, -1});

  Eigen::MatrixXd empty_rows(0, 3);
  CHECK(min_cost_assignment(empty_rows, 50.0).empty());
  Eigen::MatrixXd empty_cols(2, 0);
  CHECK(min_cost_assignment(empty_cols, 50.0) == std::vector<int>{-1, -1});
}

TEST_CASE("large assignment problems fall back to greedy") {
  // 13 rows exceeds the exact-DP limit; both paths must stay consistent on
  // a diagonal instance where greedy is optimal anyway
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(13, 13, 100.0);
  for (int i = 0; i < 13; ++i) dist(i, i) = 1.0;
  auto out = min_cost_assignment(dist, 50.0);
  for (int i = 0; i < 13; ++i) CHECK(out[std::size_t(i)] == i);
}

TEST_CASE("centroid tracker keeps ids stable and never reuses them") {
  CentroidTracker tracker({60.0, 2});

  auto ids = tracker.assign(std::vector<Detection>{det_at(10, 10), det_at(80, 80)});
  CHECK(ids == std::vector<int>{0, 1});
  CHECK(tracker.tracks().size() == 2);

  // both targets drift a little; ids must follow them even in swapped order
  ids = tracker.assign(std::vector<Detection>{det_at(82, 81), det_at(11, 12)});
  CHECK(ids == std::vector<int>{1, 0});
  CHECK(tracker.tracks().at(0).age == 2);
  CHECK(tracker.tracks().at(0).missed == 0);

  // starve the tracker until both tracks are reaped
  for (int i = 0; i < 3; ++i) tracker.assign(std::vector<Detection>{});
  CHECK(tracker.tracks().empty());

  // a new target gets a fresh id, not a recycled one
  ids = tracker.assign(std::vector<Detection>{det_at(10, 10)});
  CHECK(ids == std::vector<int>{2});
}

TEST_CASE("centroid tracker spawns instead of matching past the gate") {
  CentroidTracker tracker({20.0, 5});
  tracker.assign(std::vector<Detection>{det_at(10, 10)});

  auto ids = tracker.assign(std::vector<Detection>{det_at(90, 90)});
  CHECK(ids == std::vector<int>{1});
  CHECK(tracker.tracks().size() == 2);
  CHECK(tracker.tracks().at(0).missed == 1);
}

TEST_CASE("gaussian label peaks at exactly one") {
  auto label = gaussian_label(64, 0.1, 32.0, 64.0);
  int mu = 32;
  CHECK(label(mu, mu) == 1.0);
  CHECK(label.maxCoeff() == 1.0);

  // sigma = 0.1 * sqrt(32 * 64), so one step off-center costs exp(-1 / 40.96)
  CHECK(label(mu, mu + 1) == doctest::Approx(std::exp(-1.0 / 40.96)).epsilon(1e-12));
  CHECK(label(mu + 1, mu) == label(mu, mu + 1));

  CHECK_THROWS_AS(gaussian_label(0, 0.1, 8.0, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_label(8, 0.0, 8.0, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_label(8, 0.1, 0.0, 8.0), std::invalid_argument);
}

TEST_CASE("hann window shape") {
  auto one = hann_window(1);
  CHECK(one(0, 0) == 1.0);

  auto w = hann_window(9);
  CHECK(w(0, 0) == 0.0);
  CHECK(w(8, 8) == 0.0);
  CHECK(w(4, 4) == 1.0);  // odd size puts a full-weight sample at the center
  for (int i = 0; i < 9; ++i) {
    CHECK(w(i, 0) == w(8 - i, 0));
    CHECK(w(0, i) == w(0, 8 - i));
  }
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 1.0);
}

TEST_CASE("extract_patch samples bilinearly and clamps at edges") {
  Frame flat = Frame::gray(5, 5);
  for (auto& p : flat.pixels) p = 100;
  auto patch = extract_patch(flat, 2.0, 2.0, 10.0, 10.0, 8);
  CHECK(patch.rows() == 8);
  CHECK((patch == 100.0 / 255.0).all());

  // two-pixel frame: sampling halfway between the centers mixes them equally
  Frame two = Frame::gray(2, 1);
  two.at(0, 0) = 0;
  two.at(1, 0) = 255;
  auto mix = extract_patch(two, 0.5, 0.5, 2.0, 2.0, 2);
  CHECK(mix(0, 0) == 0.0);
  CHECK(mix(0, 1) == 0.5);
  CHECK(mix(1, 0) == mix(0, 0));  // height 1 clamps vertically
}

TEST_CASE("preprocess_patch zero-means and tapers") {
  // the mean of 256 equal terms carries a few ulp of accumulation error, so
  // a constant patch lands near zero rather than exactly on it
  Eigen::ArrayXXd flat = Eigen::ArrayXXd::Constant(16, 16, 0.7);
  CHECK(preprocess_patch(flat).abs().maxCoeff() < 1e-12);

  Rng rng(6);
  Eigen::ArrayXXd noisy(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) noisy(i, j) = rng.uniform01();
  auto prep = preprocess_patch(noisy);
  CHECK(prep(0, 0) == 0.0);    // hann endpoints kill the border
  CHECK(prep(15, 15) == 0.0);
  CHECK(prep.abs().maxCoeff() > 0.0);
}

TEST_CASE("fft2 roundtrips and satisfies parseval") {
  Rng rng(13);
  Eigen::ArrayXXd x(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) x(i, j) = rng.uniform(-1.0, 1.0);

  auto X = fft2(x);
  auto back = ifft2_real(X);
  CHECK((back - x).abs().maxCoeff() < 1e-9);

  double spatial = (x * x).sum();
  double spectral = X.abs2().sum();
  CHECK(spectral == doctest::Approx(64.0 * spatial).epsilon(1e-9));
}

TEST_CASE("training a filter on a patch reproduces its label") {
  Rng rng(29);
  Eigen::ArrayXXd patch(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) patch(i, j) = rng.uniform(0.1, 1.0);
  auto label = gaussian_label(16, 0.2, 8.0, 8.0);

  auto filter = train_filter(patch, label);
  auto resp = response_map(filter, 1e-12, patch);
  CHECK((resp - label).abs().maxCoeff() < 1e-6);
}

TEST_CASE("dcf tracker locks onto a static target") {
  Frame f = blob_frame(48.0, 48.0);
  DcfTracker tracker(f, {48.0, 48.0, 12.0, 12.0});
  for (int i = 0; i < 20; ++i) {
    DcfResult r = tracker.update(f);
    CHECK_FALSE(r.lost);
    CHECK(std::abs(r.box.cx - 48.0) < 1.5);
    CHECK(std::abs(r.box.cy - 48.0) < 1.5);
  }
}

TEST_CASE("dcf tracker follows a translating target") {
  DcfTracker tracker(blob_frame(20.0, 48.0), {20.0, 48.0, 12.0, 12.0});
  for (int k = 1; k <= 30; ++k) {
    double truth = 20.0 + 2.0 * k;
    DcfResult r = tracker.update(blob_frame(truth, 48.0));
    CHECK_FALSE(r.lost);
    CHECK(std::abs(r.box.cx - truth) < 3.0);
    CHECK(std::abs(r.box.cy - 48.0) < 3.0);
  }
}

TEST_CASE("learning rate zero freezes the filter") {
  DcfHyper hyper;
  hyper.online_lr = 0.0;
  Frame f = blob_frame(48.0, 48.0);
  DcfTracker tracker(f, {48.0, 48.0, 12.0, 12.0}, hyper);
  Eigen::ArrayXXcd num = tracker.filter().num;
  Eigen::ArrayXXd den = tracker.filter().den;
  tracker.update(blob_frame(50.0, 48.0));
  CHECK(max_abs_diff(tracker.filter().num, num) == 0.0);
  CHECK((tracker.filter().den - den).abs().maxCoeff() == 0.0);
}

TEST_CASE("learning rate one adopts the newest appearance outright") {
  DcfHyper hyper;
  hyper.online_lr = 1.0;
  Frame first = blob_frame(40.0, 40.0);
  Frame second = blob_frame(42.0, 40.0);
  DcfTracker tracker(first, {40.0, 40.0, 12.0, 12.0}, hyper);
  DcfResult r = tracker.update(second);
  REQUIRE_FALSE(r.lost);

  // a fresh tracker seated on the post-update box sees the same patch, so a
  // full replacement must reproduce its filter bit for bit
  DcfTracker fresh(second, tracker.box(), hyper);
  CHECK(max_abs_diff(tracker.filter().num, fresh.filter().num) == 0.0);
  CHECK((tracker.filter().den - fresh.filter().den).abs().maxCoeff() == 0.0);
}

TEST_CASE("dcf tracker reports loss on a blank frame and stops learning") {
  Frame f = blob_frame(48.0, 48.0);
  DcfTracker tracker(f, {48.0, 48.0, 12.0, 12.0});
  Eigen::ArrayXXcd num = tracker.filter().num;

  Frame blank = Frame::gray(96, 96);
  for (auto& p : blank.pixels) p = 40;
  DcfResult r = tracker.update(blank);
  CHECK(r.lost);
  CHECK(r.peak < tracker.hyper().loss_threshold);
  CHECK(max_abs_diff(tracker.filter().num, num) == 0.0);
}

TEST_CASE("recenter moves the window without touching the filter") {
  Frame f = blob_frame(48.0, 48.0);
  DcfTracker tracker(f, {48.0, 48.0, 12.0, 12.0});
  Eigen::ArrayXXcd num = tracker.filter().num;

  tracker.recenter({60.0, 30.0, 14.0, 14.0});
  BoundingBox b = tracker.box();
  CHECK(b.cx == 60.0);
  CHECK(b.cy == 30.0);
  CHECK(b.w == 14.0);
  CHECK(max_abs_diff(tracker.filter().num, num) == 0.0);
}

TEST_CASE("dcf constructor rejects degenerate setups") {
  Frame f = blob_frame(48.0, 48.0);
  CHECK_THROWS_AS(DcfTracker(f, {48.0, 48.0, 0.0, 12.0}), std::invalid_argument);

  DcfHyper tiny;
  tiny.template_size = 1;
  CHECK_THROWS_AS(DcfTracker(f, {48.0, 48.0, 12.0, 12.0}, tiny), std::invalid_argument);

  DcfHyper squeezed;
  squeezed.padding = 0.5;
  CHECK_THROWS_AS(DcfTracker(f, {48.0, 48.0, 12.0, 12.0}, squeezed), std::invalid_argument);
}

}  // TEST_SUITE
