#include "mlai/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <unsupported/Eigen/FFT>

#include "mlai/imaging.hpp"

namespace mlai {

// ---- assignment ----

std::vector<int> greedy_assignment(const Eigen::MatrixXd& dist, double max_dist) {
  int n = int(dist.rows()), m = int(dist.cols());
  std::vector<std::tuple<double, int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (dist(i, j) <= max_dist) edges.emplace_back(dist(i, j), i, j);
  std::sort(edges.begin(), edges.end());
  std::vector<int> out(n, -1);
  std::vector<char> col_used(m, 0);
  for (auto& [d, i, j] : edges) {
    if (out[i] != -1 || col_used[j]) continue;
    out[i] = j;
    col_used[j] = 1;
  }
  return out;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& dist, double max_dist) {
  int n = int(dist.rows()), m = int(dist.cols());
  if (n > 12 || m > 12) return greedy_assignment(dist, max_dist);

  // f(i, mask) = best completion for rows i.. with columns in mask taken,
  // ordered by matches desc, then cost asc. columns are tried in ascending
  // order and strict improvement keeps the first optimum, so reconstruction
  // is lexicographically smallest among optima.
  struct Cell {
    int matched = 0;
    double cost = 0.0;
    int choice = -1;
  };
  std::vector<std::vector<Cell>> memo(std::size_t(n) + 1,
                                      std::vector<Cell>(std::size_t(1) << m));
  for (int i = n - 1; i >= 0; --i) {
    for (int mask = 0; mask < (1 << m); ++mask) {
      Cell best;
      bool set = false;
      for (int j = 0; j < m; ++j) {
        if (mask & (1 << j)) continue;
        if (!(dist(i, j) <= max_dist)) continue;
        const Cell& rest = memo[std::size_t(i) + 1][std::size_t(mask | (1 << j))];
        int matched = rest.matched + 1;
        double cost = dist(i, j) + rest.cost;
        if (!set || matched > best.matched ||
            (matched == best.matched && cost < best.cost)) {
          best = {matched, cost, j};
          set = true;
        }
      }
      const Cell& skip = memo[std::size_t(i) + 1][std::size_t(mask)];
      if (!set || skip.matched > best.matched ||
          (skip.matched == best.matched && skip.cost < best.cost)) {
        best = {skip.matched, skip.cost, -1};
      }
      memo[std::size_t(i)][std::size_t(mask)] = best;
    }
  }

  std::vector<int> out(n, -1);
  int mask = 0;
  for (int i = 0; i < n; ++i) {
    int j = memo[std::size_t(i)][std::size_t(mask)].choice;
    out[i] = j;
    if (j >= 0) mask |= 1 << j;
  }
  return out;
}

std::vector<int> CentroidTracker::assign(std::span<const Detection> detections) {
  std::vector<int> ids;
  ids.reserve(tracks_.size());
  for (const auto& [id, t] : tracks_) ids.push_back(id);

  Eigen::MatrixXd dist(ids.size(), detections.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& t = tracks_[ids[r]];
    for (std::size_t c = 0; c < detections.size(); ++c) {
      Eigen::Vector2d d{detections[c].box.cx, detections[c].box.cy};
      dist(Eigen::Index(r), Eigen::Index(c)) = (t.centroid - d).norm();
    }
  }

  std::vector<int> choice = min_cost_assignment(dist, params_.max_dist);
  std::vector<int> out(detections.size(), -1);
  std::vector<char> det_used(detections.size(), 0);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    CentroidTrack& t = tracks_[ids[r]];
    int j = choice[r];
    if (j >= 0) {
      t.centroid = {detections[std::size_t(j)].box.cx, detections[std::size_t(j)].box.cy};
      t.box = detections[std::size_t(j)].box;
      t.age += 1;
      t.missed = 0;
      out[std::size_t(j)] = ids[r];
      det_used[std::size_t(j)] = 1;
    } else {
      t.missed += 1;
    }
  }

  for (auto it = tracks_.begin(); it != tracks_.end();) {
    if (it->second.missed > params_.max_missed)
      it = tracks_.erase(it);
    else
      ++it;
  }

  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (det_used[j]) continue;
    int id = next_id_++;
    CentroidTrack t;
    t.centroid = {detections[j].box.cx, detections[j].box.cy};
    t.box = detections[j].box;
    t.age = 1;
    tracks_[id] = t;
    out[j] = id;
  }
  return out;
}

// ---- correlation filter ----

Eigen::ArrayXXd gaussian_label(int size, double bandwidth_fraction, double target_w,
                               double target_h) {
  if (size < 1) throw std::invalid_argument("label size must be positive");
  if (!(target_w > 0.0 && target_h > 0.0))
    throw std::invalid_argument("label target size must be positive");
  double sigma = bandwidth_fraction * std::sqrt(target_w * target_h);
  if (!(sigma > 0.0)) throw std::invalid_argument("label bandwidth must be positive");
  int mu = size / 2;
  Eigen::ArrayXXd out(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double di = i - mu, dj = j - mu;
      out(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  return out;
}

Eigen::ArrayXXd hann_window(int size) {
  Eigen::ArrayXd w(size);
  if (size == 1) {
    w[0] = 1.0;
  } else {
    for (int i = 0; i < size; ++i)
      w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (size - 1)));
  }
  return w.matrix() * w.matrix().transpose();
}

Eigen::ArrayXXd extract_patch(const Frame& gray, double cx, double cy, double window_w,
                              double window_h, int out) {
  Eigen::ArrayXXd patch(out, out);
  int W = gray.width, H = gray.height;
  for (int i = 0; i < out; ++i) {
    double sy = cy - window_h / 2.0 + (i + 0.5) * window_h / out - 0.5;
    int y0 = int(std::floor(sy));
    double fy = sy - y0;
    int ya = std::clamp(y0, 0, H - 1);
    int yb = std::clamp(y0 + 1, 0, H - 1);
    for (int j = 0; j < out; ++j) {
      double sx = cx - window_w / 2.0 + (j + 0.5) * window_w / out - 0.5;
      int x0 = int(std::floor(sx));
      double fx = sx - x0;
      int xa = std::clamp(x0, 0, W - 1);
      int xb = std::clamp(x0 + 1, 0, W - 1);
      double v00 = gray.at(xa, ya), v10 = gray.at(xb, ya);
      double v01 = gray.at(xa, yb), v11 = gray.at(xb, yb);
      double v = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
      patch(i, j) = v / 255.0;
    }
  }
  return patch;
}

Eigen::ArrayXXd preprocess_patch(const Eigen::ArrayXXd& patch) {
  static thread_local std::map<int, Eigen::ArrayXXd> hann_cache;
  auto it = hann_cache.find(int(patch.rows()));
  if (it == hann_cache.end())
    it = hann_cache.emplace(int(patch.rows()), hann_window(int(patch.rows()))).first;
  return (patch - patch.mean()) * it->second;
}

Eigen::ArrayXXcd fft2(const Eigen::ArrayXXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd m = in.matrix();
  Eigen::Index R = m.rows(), C = m.cols();
  Eigen::VectorXcd iv(C), ov(C);
  for (Eigen::Index r = 0; r < R; ++r) {
    iv = m.row(r).transpose();
    fft.fwd(ov, iv);
    m.row(r) = ov.transpose();
  }
  Eigen::VectorXcd iv2(R), ov2(R);
  for (Eigen::Index c = 0; c < C; ++c) {
    iv2 = m.col(c);
    fft.fwd(ov2, iv2);
    m.col(c) = ov2;
  }
  return m.array();
}

Eigen::ArrayXXcd fft2(const Eigen::ArrayXXd& in) {
  return fft2(Eigen::ArrayXXcd(in.cast<std::complex<double>>()));
}

Eigen::ArrayXXd ifft2_real(const Eigen::ArrayXXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd m = in.matrix();
  Eigen::Index R = m.rows(), C = m.cols();
  Eigen::VectorXcd iv(C), ov(C);
  for (Eigen::Index r = 0; r < R; ++r) {
    iv = m.row(r).transpose();
    fft.inv(ov, iv);
    m.row(r) = ov.transpose();
  }
  Eigen::VectorXcd iv2(R), ov2(R);
  for (Eigen::Index c = 0; c < C; ++c) {
    iv2 = m.col(c);
    fft.inv(ov2, iv2);
    m.col(c) = ov2;
  }
  return m.real().array();
}

FilterTerms train_filter(const Eigen::ArrayXXd& patch, const Eigen::ArrayXXd& label) {
  Eigen::ArrayXXcd X = fft2(patch);
  Eigen::ArrayXXcd Y = fft2(label);
  FilterTerms f;
  f.num = X.conjugate() * Y;
  f.den = (X.conjugate() * X).real();
  return f;
}

Eigen::ArrayXXd response_map(const FilterTerms& filter, double lambda,
                             const Eigen::ArrayXXd& patch) {
  Eigen::ArrayXXcd Z = fft2(patch);
  Eigen::ArrayXXcd H = filter.num / (filter.den + lambda).cast<std::complex<double>>();
  return ifft2_real(Z * H);
}

DcfTracker::DcfTracker(const Frame& frame, const BoundingBox& target, DcfHyper hyper)
    : hyper_(std::move(hyper)) {
  if (!(target.w > 0.0 && target.h > 0.0))
    throw std::invalid_argument("target box must have positive size");
  if (hyper_.template_size < 2) throw std::invalid_argument("template size too small");
  if (!(hyper_.padding >= 1.0)) throw std::invalid_argument("padding must be >= 1");
  cx_ = target.cx;
  cy_ = target.cy;
  window_w_ = target.w * hyper_.padding;
  window_h_ = target.h * hyper_.padding;
  int t = hyper_.template_size;
  // in template coordinates the target occupies t/padding on each side
  label_ = gaussian_label(t, hyper_.gaussian_bandwidth, t / hyper_.padding, t / hyper_.padding);
  filter_ = train_filter(sample(to_gray(frame), 1.0), label_);
}

Eigen::ArrayXXd DcfTracker::sample(const Frame& gray, double scale) const {
  return preprocess_patch(
      extract_patch(gray, cx_, cy_, window_w_ * scale, window_h_ * scale, hyper_.template_size));
}

void DcfTracker::recenter(const BoundingBox& target) {
  cx_ = target.cx;
  cy_ = target.cy;
  if (target.w > 0.0 && target.h > 0.0) {
    window_w_ = target.w * hyper_.padding;
    window_h_ = target.h * hyper_.padding;
  }
}

BoundingBox DcfTracker::box() const {
  return {cx_, cy_, window_w_ / hyper_.padding, window_h_ / hyper_.padding};
}

DcfResult DcfTracker::update(const Frame& frame) {
  Frame gray = to_gray(frame);
  int t = hyper_.template_size;
  int mu = t / 2;

  double best_peak = -std::numeric_limits<double>::infinity();
  double best_scale = 1.0;
  int best_r = mu, best_c = mu;
  for (double s : hyper_.scales) {
    Eigen::ArrayXXd resp = response_map(filter_, hyper_.lambda, sample(gray, s));
    Eigen::Index r, c;
    double peak = resp.maxCoeff(&r, &c);
    if (peak > best_peak) {
      best_peak = peak;
      best_scale = s;
      best_r = int(r);
      best_c = int(c);
    }
  }

  double ww = window_w_ * best_scale, wh = window_h_ * best_scale;
  cx_ += (best_c - mu) * ww / t;
  cy_ += (best_r - mu) * wh / t;
  window_w_ = ww;
  window_h_ = wh;

  DcfResult res;
  res.peak = best_peak;
  res.lost = best_peak < hyper_.loss_threshold;
  if (!res.lost && hyper_.online_lr > 0.0) {
    FilterTerms fresh = train_filter(sample(gray, 1.0), label_);
    if (hyper_.online_lr >= 1.0) {
      filter_ = std::move(fresh);
    } else {
      double lr = hyper_.online_lr;
      filter_.num = (1.0 - lr) * filter_.num + lr * fresh.num;
      filter_.den = (1.0 - lr) * filter_.den + lr * fresh.den;
    }
  }
  res.box = box();
  return res;
}

}  // namespace mlai
