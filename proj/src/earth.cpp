#include "insobs/earth.hpp"

#include <cmath>

namespace insobs {

double gravity_magnitude(double latitude, double altitude) {
    const double s2 = std::sin(latitude) * std::sin(latitude);
    const double g0 = wgs84::kGravityEquator * (1.0 + wgs84::kGravityFormulaK * s2) /
                      std::sqrt(1.0 - wgs84::kEccSq * s2);
    return g0 - wgs84::kFreeAirGradient * altitude;
}

std::pair<double, double> curvature_radii(double latitude) {
    const double s2 = std::sin(latitude) * std::sin(latitude);
    const double w = 1.0 - wgs84::kEccSq * s2;
    const double r_e = wgs84::kSemiMajor / std::sqrt(w);
    const double r_n = wgs84::kSemiMajor * (1.0 - wgs84::kEccSq) / (w * std::sqrt(w));
    return {r_e, r_n};
}

EarthParams EarthParams::at(double latitude, double altitude) {
    EarthParams p;
    p.latitude = latitude;
    p.altitude = altitude;
    p.earth_rate = wgs84::kEarthRate;
    p.gravity = gravity_magnitude(latitude, altitude);
    std::tie(p.r_transverse, p.r_meridian) = curvature_radii(latitude);
    return p;
}

Vec3 earth_rate_n(const EarthParams& p) {
    return Vec3(p.earth_rate * std::cos(p.latitude), p.earth_rate * std::sin(p.latitude), 0.0);
}

}  // namespace insobs
