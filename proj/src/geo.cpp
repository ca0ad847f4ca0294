#include "mlai/geo.hpp"

#include <cmath>

#include "mlai/types.hpp"

namespace mlai {

double bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a == b) throw CoincidentPoints{};
  double lat1 = deg2rad(a.latitude);
  double lat2 = deg2rad(b.latitude);
  double dlon = deg2rad(b.longitude - a.longitude);
  double y = std::sin(dlon) * std::cos(lat2);
  double x = std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
  double deg = rad2deg(std::atan2(y, x));
  deg = std::fmod(deg + 360.0, 360.0);
  return deg;
}

double to_quad_angle(double bearing_deg) {
  return bearing_deg > 180.0 ? bearing_deg - 360.0 : bearing_deg;
}

double heading_to(const GeoPoint& a, const GeoPoint& b) {
  return to_quad_angle(bearing(a, b));
}

}  // namespace mlai
