#pragma once

// two trackers: a centroid tracker that turns per-frame detections into
// stable track ids, and a discriminative correlation filter that follows one
// target through detector gaps.
//
// the correlation filter works in the Fourier domain: with training patch x,
// desired response y, and spectra X = F(x), Y = F(y),
//   numerator   N = conj(X) .* Y
//   denominator D = conj(X) .* X
// and the response to a new patch z is real(ifft(F(z) .* N / (D + lambda))).
// both N and D are blended online with the learning rate.

#include <Eigen/Core>
#include <map>
#include <span>
#include <vector>

#include "mlai/box.hpp"
#include "mlai/detection.hpp"
#include "mlai/frame.hpp"

namespace mlai {

// ---- centroid tracker ----

struct CentroidTrack {
  Eigen::Vector2d centroid{0.0, 0.0};
  BoundingBox box;
  int age = 0;     // frames matched
  int missed = 0;  // consecutive frames unmatched
};

struct CentroidParams {
  double max_dist = 60.0;  // gate: pairs farther than this never match
  int max_missed = 10;     // drop a track after this many unmatched frames
};

// per-row (track) choice of column (detection), -1 for unmatched. pairs with
// dist(r, c) > max_dist are infeasible. maximizes the number of matches, then
// minimizes total distance; ties break toward lexicographically smaller
// column choices in row order. exact up to 12x12 via bitmask DP, greedy
// ascending-distance matching above that.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& dist, double max_dist);
std::vector<int> greedy_assignment(const Eigen::MatrixXd& dist, double max_dist);

class CentroidTracker {
 public:
  explicit CentroidTracker(CentroidParams params = {}) : params_(params) {}

  // matches detections to existing tracks, spawns tracks for the rest, ages
  // and reaps unmatched tracks. returns the track id of each detection.
  // ids are never reused.
  std::vector<int> assign(std::span<const Detection> detections);

  const std::map<int, CentroidTrack>& tracks() const { return tracks_; }
  const CentroidParams& params() const { return params_; }

 private:
  std::map<int, CentroidTrack> tracks_;
  CentroidParams params_;
  int next_id_ = 0;
};

// ---- correlation filter ----

struct DcfHyper {
  double lambda = 1e-4;            // ridge regularizer
  double online_lr = 0.008;        // model blend rate per frame
  double gaussian_bandwidth = 0.1; // label sigma = bandwidth * sqrt(w * h)
  double padding = 2.0;            // search window = target size * padding
  double loss_threshold = 0.05;    // declare the target lost below this peak
  std::vector<double> scales = {1.0 / 1.03, 1.0, 1.03};
  int template_size = 64;
};

// size x size gaussian bump, sigma = bandwidth_fraction * sqrt(w * h), peak
// exactly 1.0 at the integer center (size/2, size/2)
Eigen::ArrayXXd gaussian_label(int size, double bandwidth_fraction, double target_w,
                               double target_h);

Eigen::ArrayXXd hann_window(int size);

// bilinear sample of a window x window region centered on (cx, cy) into an
// out x out grid, intensities scaled to [0, 1], edges clamped
Eigen::ArrayXXd extract_patch(const Frame& gray, double cx, double cy, double window_w,
                              double window_h, int out);

// zero-mean then taper with the Hann window
Eigen::ArrayXXd preprocess_patch(const Eigen::ArrayXXd& patch);

Eigen::ArrayXXcd fft2(const Eigen::ArrayXXd& in);
Eigen::ArrayXXcd fft2(const Eigen::ArrayXXcd& in);
Eigen::ArrayXXd ifft2_real(const Eigen::ArrayXXcd& in);

struct FilterTerms {
  Eigen::ArrayXXcd num;
  Eigen::ArrayXXd den;
};

FilterTerms train_filter(const Eigen::ArrayXXd& patch, const Eigen::ArrayXXd& label);

Eigen::ArrayXXd response_map(const FilterTerms& filter, double lambda,
                             const Eigen::ArrayXXd& patch);

struct DcfResult {
  BoundingBox box;
  double peak = 0.0;
  bool lost = false;
};

class DcfTracker {
 public:
  DcfTracker(const Frame& frame, const BoundingBox& target, DcfHyper hyper = {});

  // searches around the last position over the scale set, moves to the best
  // response peak, and blends the filter with the new appearance unless the
  // peak fell under the loss threshold
  DcfResult update(const Frame& frame);

  // re-seat the tracker on a detector fix without discarding the filter
  void recenter(const BoundingBox& target);

  BoundingBox box() const;
  const FilterTerms& filter() const { return filter_; }
  const DcfHyper& hyper() const { return hyper_; }

 private:
  Eigen::ArrayXXd sample(const Frame& gray, double scale) const;

  DcfHyper hyper_;
  FilterTerms filter_;
  Eigen::ArrayXXd label_;
  double cx_, cy_;          // target center
  double window_w_, window_h_;
};

}  // namespace mlai
