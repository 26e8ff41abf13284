#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mobiscope/core.hpp"
#include "mobiscope/error.hpp"
#include "mobiscope/geodesy.hpp"
#include "mobiscope/ingest.hpp"

namespace mobiscope {

/// x -> scale * rotation * x + translation.
template <typename Scalar>
struct Similarity {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

  Scalar scale = Scalar(1);
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Similarity identity() { return {}; }

  /// Maps every column of a 3xN matrix.
  template <typename Derived>
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> operator()(const Eigen::MatrixBase<Derived>& points) const {
    Eigen::Matrix<Scalar, 3, Eigen::Dynamic> out = (scale * rotation) * points;
    out.colwise() += translation;
    return out;
  }

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = scale * rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  Similarity inverse() const {
    Similarity inv;
    inv.scale = Scalar(1) / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.scale * (inv.rotation * translation));
    return inv;
  }

  bool operator==(const Similarity& o) const {
    return scale == o.scale && rotation == o.rotation && translation == o.translation;
  }
};

using SimilarityTransform = Similarity<double>;

/// Closed-form least-squares similarity mapping `src` columns onto `dst`
/// columns: centroids, cross-covariance SVD, a sign correction that keeps
/// det(R) = +1, and scale = tr(D S) / var(src). Both inputs are 3xN.
/// No input checking; see umeyama_align for the validated entry point.
template <typename DerivedSrc, typename DerivedDst>
Similarity<typename DerivedSrc::Scalar> umeyama_similarity(const Eigen::MatrixBase<DerivedSrc>& src,
                                                           const Eigen::MatrixBase<DerivedDst>& dst) {
  using Scalar = typename DerivedSrc::Scalar;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  static_assert(DerivedSrc::RowsAtCompileTime == 3 || DerivedSrc::RowsAtCompileTime == Eigen::Dynamic);

  const Eigen::Index n = src.cols();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  const Vec3 mean_src = src.rowwise().sum() * inv_n;
  const Vec3 mean_dst = dst.rowwise().sum() * inv_n;
  const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> src_c = src.colwise() - mean_src;
  const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> dst_c = dst.colwise() - mean_dst;

  const Scalar var_src = src_c.squaredNorm() * inv_n;
  const Mat3 cross_cov = dst_c * src_c.transpose() * inv_n;

  Eigen::JacobiSVD<Mat3> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < Scalar(0)) s(2) = Scalar(-1);

  Similarity<Scalar> out;
  out.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  out.scale = svd.singularValues().dot(s) / var_src;
  out.translation = mean_dst - out.scale * (out.rotation * mean_src);
  return out;
}

/// SLAM position paired with the GPS anchor nearest to it in time.
struct AnchorPair {
  Timestamp t;
  Eigen::Vector3d slam = Eigen::Vector3d::Zero();
  EnuPoint enu = EnuPoint::Zero();

  bool operator==(const AnchorPair&) const = default;
};

enum class AnchorRejectReason { accuracy, speed };

struct AnchorRejection {
  Timestamp t;
  AnchorRejectReason reason;

  bool operator==(const AnchorRejection&) const = default;
};

struct AnchorSelection {
  SampleSeries<GpsFix> anchors;
  std::vector<AnchorRejection> rejected;
};

struct AnchorGate {
  double max_h_acc_m = 10.0;
  double max_speed_mps = 3.0;
};

/// Keeps fixes with h_acc_m <= max_h_acc_m whose implied speed from the
/// previously kept fix is <= max_speed_mps.
AnchorSelection select_gps_anchors(const SampleSeries<GpsFix>& gps, const AnchorGate& gate);

Geodetic to_geodetic(const GpsFix& fix);

/// Pairs each anchor with the nearest-in-time pose within `tol`; the anchor
/// height is pinned to the tangent plane (u = 0) unless `use_altitude`.
std::vector<AnchorPair> pair_anchors(const SampleSeries<SlamPose>& slam, const SampleSeries<GpsFix>& anchors,
                                     const Geodetic& origin, Duration tol, bool use_altitude = false);

inline constexpr double kMinPlausibleScale = 0.2;
inline constexpr double kMaxPlausibleScale = 5.0;

/// Validated Umeyama fit of SLAM onto ENU over the pairs. The result does not
/// depend on pair order.
SimilarityTransform umeyama_align(std::span<const AnchorPair> pairs);

/// Throws DegenerateGeometry when the anchors' ENU bounding-box diagonal is
/// below `min_diag_m`.
void check_anchor_spread(std::span<const AnchorPair> pairs, double min_diag_m);

double residual_rms(std::span<const AnchorPair> pairs, const SimilarityTransform& transform);

struct TrajectoryPoint {
  Timestamp t;
  EnuPoint enu = EnuPoint::Zero();
  Geodetic geo;
  double arc_m = 0.0;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct FusedTrajectory {
  Geodetic origin;
  std::vector<TrajectoryPoint> points;

  bool empty() const { return points.empty(); }
  double total_arc_m() const { return points.empty() ? 0.0 : points.back().arc_m; }
  TimeRange time_range() const { return {points.front().t, points.back().t}; }
  bool operator==(const FusedTrajectory&) const = default;
};

/// Builds points with geo back-projection and cumulative chord arc length.
FusedTrajectory make_trajectory(std::vector<Timestamp> times, const std::vector<EnuPoint>& enu, const Geodetic& origin);

FusedTrajectory fuse_trajectory(const SampleSeries<SlamPose>& slam, const SimilarityTransform& transform,
                                const Geodetic& origin);

/// Piecewise alignment: one fit per anchor window, blended between window
/// centers.
struct TransformKnot {
  Timestamp center;
  SimilarityTransform transform;
  std::size_t n_anchors = 0;

  bool operator==(const TransformKnot&) const = default;
};

struct PiecewiseAlignment {
  std::vector<TransformKnot> knots;
  std::size_t skipped_windows = 0;

  /// Linear blend of the bracketing knots' mapped points; clamps outside.
  Eigen::Vector3d apply(Timestamp t, const Eigen::Vector3d& slam) const;
  bool operator==(const PiecewiseAlignment&) const = default;
};

/// Windows of at least `window_anchors` anchors with 50% overlap. A window
/// whose SLAM points are too close to collinear is grown until it is not.
PiecewiseAlignment piecewise_align(std::span<const AnchorPair> pairs, std::size_t window_anchors);

FusedTrajectory fuse_trajectory(const SampleSeries<SlamPose>& slam, const PiecewiseAlignment& alignment,
                                const Geodetic& origin);

struct LocatedPoint {
  EnuPoint enu = EnuPoint::Zero();
  Geodetic geo;
  double arc_m = 0.0;
};

/// Linear interpolation between the bracketing points; OutOfRange outside.
LocatedPoint locate(const FusedTrajectory& traj, Timestamp t);

/// Earliest time at which the trajectory reaches arc length `arc_m`.
Timestamp time_at_arc(const FusedTrajectory& traj, double arc_m);

struct GeoParams {
  AnchorGate gate;
  Duration pair_tol{200'000};
  double min_anchor_diag_m = 20.0;
  bool use_altitude = false;
  bool piecewise = false;
  std::size_t piecewise_window_anchors = 60;
};

struct AlignmentResult {
  Geodetic origin;
  AnchorSelection selection;
  std::vector<AnchorPair> pairs;
  SimilarityTransform global;
  std::optional<PiecewiseAlignment> piecewise;
  double anchor_residual_rms_m = 0.0;
  FusedTrajectory trajectory;
};

/// Anchor gating, pairing, alignment, and fusion; the ENU origin is the first
/// accepted fix.
AlignmentResult align_session(const SampleSeries<GpsFix>& gps, const SampleSeries<SlamPose>& slam,
                              const GeoParams& params);

}  // namespace mobiscope
