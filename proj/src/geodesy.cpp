#include "mobiscope/geodesy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "mobiscope/error.hpp"

namespace mobiscope {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check(const Geodetic& g) {
  if (!std::isfinite(g.lat_deg) || !std::isfinite(g.lon_deg) || !std::isfinite(g.h_m) || g.lat_deg < -90.0 ||
      g.lat_deg > 90.0 || g.lon_deg < -180.0 || g.lon_deg > 180.0) {
    throw Error(Errc::GeodesyError,
                "invalid geodetic coordinate (" + std::to_string(g.lat_deg) + ", " + std::to_string(g.lon_deg) + ")");
  }
}

/// Rows are the east, north, up unit vectors at the origin, in ECEF.
Eigen::Matrix3d ecef_to_enu_rotation(const Geodetic& origin) {
  const double sl = std::sin(origin.lat_deg * kDeg);
  const double cl = std::cos(origin.lat_deg * kDeg);
  const double so = std::sin(origin.lon_deg * kDeg);
  const double co = std::cos(origin.lon_deg * kDeg);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

}  // namespace

Eigen::Vector3d geodetic_to_ecef(const Geodetic& g) {
  const double lat = g.lat_deg * kDeg;
  const double lon = g.lon_deg * kDeg;
  const double sl = std::sin(lat);
  const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
  return {(n + g.h_m) * std::cos(lat) * std::cos(lon), (n + g.h_m) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - wgs84::kEcc2) + g.h_m) * sl};
}

Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef) {
  const double x = ecef.x();
  const double y = ecef.y();
  const double z = ecef.z();
  const double p = std::hypot(x, y);
  const double lon = std::atan2(y, x);
  // Fixed-point iteration on latitude; converges to machine precision well
  // within the iteration budget for terrestrial heights.
  double lat = std::atan2(z, p * (1.0 - wgs84::kEcc2));
  double h = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double sl = std::sin(lat);
    const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
    h = p / std::cos(lat) - n;
    const double next = std::atan2(z, p * (1.0 - wgs84::kEcc2 * n / (n + h)));
    if (next == lat) break;
    lat = next;
  }
  const double sl = std::sin(lat);
  const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
  // Height from whichever projection is better conditioned at this latitude.
  if (std::abs(std::cos(lat)) > 1e-3) {
    h = p / std::cos(lat) - n;
  } else {
    h = z / sl - n * (1.0 - wgs84::kEcc2);
  }
  return {lat / kDeg, lon / kDeg, h};
}

EnuPoint wgs84_to_enu(const Geodetic& point, const Geodetic& origin) {
  check(point);
  check(origin);
  return ecef_to_enu_rotation(origin) * (geodetic_to_ecef(point) - geodetic_to_ecef(origin));
}

Geodetic enu_to_wgs84(const EnuPoint& enu, const Geodetic& origin) {
  check(origin);
  if (!enu.allFinite()) throw Error(Errc::GeodesyError, "non-finite ENU coordinate");
  return ecef_to_geodetic(geodetic_to_ecef(origin) + ecef_to_enu_rotation(origin).transpose() * enu);
}

}  // namespace mobiscope
