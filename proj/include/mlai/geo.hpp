#pragma once

// great-circle bearing math for pointing one sensor at another.

#include <stdexcept>

namespace mlai {

struct CoincidentPoints : std::runtime_error {
  CoincidentPoints() : std::runtime_error("bearing between coincident points is undefined") {}
};

struct GeoPoint {
  double latitude = 0.0;   // degrees, north positive
  double longitude = 0.0;  // degrees, east positive

  bool operator==(const GeoPoint&) const = default;
};

// initial great-circle bearing from a to b, degrees clockwise from true
// north in [0, 360). throws CoincidentPoints when a == b.
double bearing(const GeoPoint& a, const GeoPoint& b);

// fold a [0, 360) bearing into the signed turn range (-180, 180]: angles
// past 180 become negative (e.g. 181 -> -179), 180 itself stays +180
double to_quad_angle(double bearing_deg);

// signed heading from a toward b, i.e. to_quad_angle(bearing(a, b))
double heading_to(const GeoPoint& a, const GeoPoint& b);

}  // namespace mlai
