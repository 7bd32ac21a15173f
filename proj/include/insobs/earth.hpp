// Earth rate, normal gravity and curvature radii for a fixed known location.
#pragma once

#include "insobs/attitude.hpp"
#include "insobs/units.hpp"

namespace insobs {

namespace wgs84 {
inline constexpr double kEarthRate = 7.2921151467e-5;     // [rad/s]
inline constexpr double kSemiMajor = 6378137.0;           // [m]
inline constexpr double kEccSq = 0.00669437999014;        // first eccentricity^2
inline constexpr double kGravityEquator = 9.7803253359;   // [m/s^2]
inline constexpr double kGravityFormulaK = 0.00193185265241;
inline constexpr double kFreeAirGradient = 3.086e-6;      // [1/s^2]
}  // namespace wgs84

/// Somigliana normal gravity at latitude [rad] with the linear free-air
/// correction for altitude [m].
double gravity_magnitude(double latitude, double altitude);

/// (transverse, meridian) curvature radii of the reference ellipsoid [m].
std::pair<double, double> curvature_radii(double latitude);

/// Location-dependent constants, immutable once built. Latitudes at the
/// poles are rejected at the configuration boundary, not here, so that the
/// raw formulas stay testable.
struct EarthParams {
    double latitude = deg_to_rad(28.2204);  // [rad]
    double altitude = 60.0;                 // [m]
    double earth_rate = wgs84::kEarthRate;  // [rad/s]
    double gravity = 0.0;                   // [m/s^2]
    double r_transverse = 0.0;              // [m]
    double r_meridian = 0.0;                // [m]

    static EarthParams at(double latitude, double altitude);

    /// Gravity vector in the (North, Up, East) navigation frame.
    Vec3 gravity_n() const { return Vec3(0.0, -gravity, 0.0); }
};

/// Earth rotation rate in the (North, Up, East) navigation frame:
/// (Omega cos L, Omega sin L, 0).
Vec3 earth_rate_n(const EarthParams& p);

}  // namespace insobs
