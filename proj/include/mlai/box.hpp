#pragma once

// axis-aligned rectangle types shared by detection, tracking, and imaging.
// BoundingBox is center-based (cx, cy, w, h), the convention the detector's
// coordinate transforms produce; RectF is corner-based (x, y, w, h) and is
// used for sensor fields of view.

#include <algorithm>

namespace mlai {

struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return cx - w / 2.0; }
  double right() const { return cx + w / 2.0; }
  double top() const { return cy - h / 2.0; }
  double bottom() const { return cy + h / 2.0; }
  double area() const { return w * h; }

  bool contains(double x, double y) const {
    return x >= left() && x < right() && y >= top() && y < bottom();
  }
};

struct RectF {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
};

// intersection-over-union of two center-based boxes; 0 when either is
// degenerate or they do not overlap
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0) return 0.0;
  double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace mlai
