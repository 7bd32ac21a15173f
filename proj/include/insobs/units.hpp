#pragma once

#include <numbers>

namespace insobs {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// deg/h <-> rad/s (gyro bias units)
constexpr double degh_to_rads(double degh) { return degh * kPi / (180.0 * 3600.0); }
constexpr double rads_to_degh(double rads) { return rads * 180.0 * 3600.0 / kPi; }

// deg/s <-> rad/s (rotation rates)
constexpr double dps_to_rads(double dps) { return dps * kPi / 180.0; }
constexpr double rads_to_dps(double rads) { return rads * 180.0 / kPi; }

// micro-g <-> m/s^2 (accelerometer bias units); ug is defined against standard gravity
inline constexpr double kStandardGravity = 9.80665;
constexpr double ug_to_ms2(double ug) { return ug * 1e-6 * kStandardGravity; }
constexpr double ms2_to_ug(double ms2) { return ms2 / (1e-6 * kStandardGravity); }

}  // namespace insobs
