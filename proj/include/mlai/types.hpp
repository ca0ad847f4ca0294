#pragma once

#include <cstdint>

namespace mlai {

// identifies a sensor node (drone, fixed camera) on the wire; 16-bit by contract
using SensorId = std::uint16_t;

// identifies a tracked object; assigned by the tracking layer, never reused
using ObjectId = std::uint32_t;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * (kPi / 180.0); }
inline constexpr double rad2deg(double r) { return r * (180.0 / kPi); }

}  // namespace mlai
