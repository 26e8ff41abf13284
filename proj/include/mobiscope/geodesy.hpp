#pragma once

#include <Eigen/Core>

namespace mobiscope {

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEcc2 = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

/// Geodetic position on the WGS84 ellipsoid; height in meters above it.
struct Geodetic {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double h_m = 0.0;

  bool operator==(const Geodetic&) const = default;
};

/// East-North-Up meters relative to a geodetic origin.
using EnuPoint = Eigen::Vector3d;

Eigen::Vector3d geodetic_to_ecef(const Geodetic& g);
Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef);

/// Throws GeodesyError for out-of-range or non-finite coordinates.
EnuPoint wgs84_to_enu(const Geodetic& point, const Geodetic& origin);
Geodetic enu_to_wgs84(const EnuPoint& enu, const Geodetic& origin);

}  // namespace mobiscope
