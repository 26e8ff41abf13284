#include "mobiscope/geo_fusion.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace mobiscope {

namespace {

// Rank test on the SLAM scatter: second eigenvalue relative to the first.
constexpr double kRankTolerance = 1e-10;
// Piecewise windows must be comfortably two-dimensional, not merely rank 2.
constexpr double kWindowConditioning = 1e-3;

double planarity_ratio(std::span<const AnchorPair> pairs, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = begin; i < end; ++i) mean += pairs[i].slam;
  mean /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = begin; i < end; ++i) {
    const Eigen::Vector3d d = pairs[i].slam - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0)) return 0.0;
  return ev(1) / ev(2);
}

}  // namespace

Geodetic to_geodetic(const GpsFix& fix) { return {fix.lat_deg, fix.lon_deg, 0.0}; }

AnchorSelection select_gps_anchors(const SampleSeries<GpsFix>& gps, const AnchorGate& gate) {
  AnchorSelection out;
  std::vector<Timestamp> ts;
  std::vector<GpsFix> kept;
  for (std::size_t i = 0; i < gps.size(); ++i) {
    const GpsFix& fix = gps.value(i);
    const Timestamp t = gps.time(i);
    if (!(fix.h_acc_m <= gate.max_h_acc_m)) {
      out.rejected.push_back({t, AnchorRejectReason::accuracy});
      continue;
    }
    if (!kept.empty()) {
      const EnuPoint d = wgs84_to_enu(to_geodetic(fix), to_geodetic(kept.back()));
      const double dist = d.head<2>().norm();
      const double dt = to_seconds(t - ts.back());
      if (dist / dt > gate.max_speed_mps) {
        out.rejected.push_back({t, AnchorRejectReason::speed});
        continue;
      }
    }
    ts.push_back(t);
    kept.push_back(fix);
  }
  out.anchors = SampleSeries<GpsFix>(std::move(ts), std::move(kept));
  return out;
}

std::vector<AnchorPair> pair_anchors(const SampleSeries<SlamPose>& slam, const SampleSeries<GpsFix>& anchors,
                                     const Geodetic& origin, Duration tol, bool use_altitude) {
  std::vector<AnchorPair> pairs;
  if (slam.empty()) return pairs;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Timestamp t = anchors.time(i);
    const std::size_t hi = slam.lower_index(t);
    std::size_t best = hi;
    if (hi == slam.size()) {
      best = hi - 1;
    } else if (hi > 0 && (t - slam.time(hi - 1)) <= (slam.time(hi) - t)) {
      best = hi - 1;
    }
    const Duration gap = t > slam.time(best) ? t - slam.time(best) : slam.time(best) - t;
    if (gap > tol) continue;
    AnchorPair p;
    p.t = t;
    p.slam = slam.value(best).position;
    p.enu = wgs84_to_enu(to_geodetic(anchors.value(i)), origin);
    if (!use_altitude) p.enu.z() = 0.0;
    pairs.push_back(p);
  }
  return pairs;
}

SimilarityTransform umeyama_align(std::span<const AnchorPair> pairs) {
  if (pairs.size() < 3) {
    throw Error(Errc::InsufficientAnchors, "need at least 3 anchor pairs, have " + std::to_string(pairs.size()));
  }
  // Fixed summation order so that relabeling the pairs cannot change a bit.
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    const auto& p = pairs[i];
    return std::make_tuple(p.slam.x(), p.slam.y(), p.slam.z(), p.enu.x(), p.enu.y(), p.enu.z(), p.t);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::Matrix3Xd src(3, n);
  Eigen::Matrix3Xd dst(3, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    src.col(c) = pairs[order[static_cast<std::size_t>(c)]].slam;
    dst.col(c) = pairs[order[static_cast<std::size_t>(c)]].enu;
  }

  const Eigen::Matrix3Xd centered = src.colwise() - src.rowwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(centered * centered.transpose() / static_cast<double>(n),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(2) > 0.0) || ev(1) <= kRankTolerance * ev(2)) {
    throw Error(Errc::DegenerateGeometry, "SLAM anchor positions are collinear or coincident");
  }

  SimilarityTransform t = umeyama_similarity(src, dst);
  if (!(t.scale >= kMinPlausibleScale && t.scale <= kMaxPlausibleScale)) {
    throw Error(Errc::ImplausibleScale, "recovered scale " + std::to_string(t.scale) + " outside [0.2, 5]");
  }
  return t;
}

void check_anchor_spread(std::span<const AnchorPair> pairs, double min_diag_m) {
  if (pairs.empty()) throw Error(Errc::InsufficientAnchors, "no anchor pairs");
  Eigen::Vector3d lo = pairs.front().enu;
  Eigen::Vector3d hi = lo;
  for (const auto& p : pairs) {
    lo = lo.cwiseMin(p.enu);
    hi = hi.cwiseMax(p.enu);
  }
  const double diag = (hi - lo).norm();
  if (diag < min_diag_m) {
    throw Error(Errc::DegenerateGeometry,
                "anchor bounding-box diagonal " + std::to_string(diag) + " m below " + std::to_string(min_diag_m) + " m");
  }
}

double residual_rms(std::span<const AnchorPair> pairs, const SimilarityTransform& transform) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) sum += (p.enu - transform.apply(p.slam)).squaredNorm();
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

FusedTrajectory make_trajectory(std::vector<Timestamp> times, const std::vector<EnuPoint>& enu, const Geodetic& origin) {
  FusedTrajectory traj;
  traj.origin = origin;
  traj.points.reserve(times.size());
  double arc = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      if (times[i] <= times[i - 1]) throw Error(Errc::StreamOrderError, "trajectory times must increase");
      arc += (enu[i] - enu[i - 1]).norm();
    }
    traj.points.push_back({times[i], enu[i], enu_to_wgs84(enu[i], origin), arc});
  }
  return traj;
}

FusedTrajectory fuse_trajectory(const SampleSeries<SlamPose>& slam, const SimilarityTransform& transform,
                                const Geodetic& origin) {
  std::vector<EnuPoint> enu;
  enu.reserve(slam.size());
  for (const auto& pose : slam.values()) enu.push_back(transform.apply(pose.position));
  return make_trajectory({slam.times().begin(), slam.times().end()}, enu, origin);
}

Eigen::Vector3d PiecewiseAlignment::apply(Timestamp t, const Eigen::Vector3d& slam) const {
  auto after = std::upper_bound(knots.begin(), knots.end(), t,
                                [](Timestamp v, const TransformKnot& k) { return v < k.center; });
  if (after == knots.begin()) return knots.front().transform.apply(slam);
  if (after == knots.end()) return knots.back().transform.apply(slam);
  const auto& a = *(after - 1);
  const auto& b = *after;
  const double alpha = to_seconds(t - a.center) / to_seconds(b.center - a.center);
  return (1.0 - alpha) * a.transform.apply(slam) + alpha * b.transform.apply(slam);
}

PiecewiseAlignment piecewise_align(std::span<const AnchorPair> input, std::size_t window_anchors) {
  window_anchors = std::max<std::size_t>(window_anchors, 10);
  std::vector<AnchorPair> pairs(input.begin(), input.end());
  std::sort(pairs.begin(), pairs.end(), [](const AnchorPair& a, const AnchorPair& b) { return a.t < b.t; });
  const std::size_t n = pairs.size();
  if (n < 3) throw Error(Errc::InsufficientAnchors, "need at least 3 anchor pairs");

  PiecewiseAlignment out;
  const std::size_t grow = std::max<std::size_t>(window_anchors / 2, 1);
  std::size_t begin = 0;
  while (true) {
    std::size_t end = std::min(n, begin + window_anchors);
    while (end < n && planarity_ratio(pairs, begin, end) < kWindowConditioning) end = std::min(n, end + grow);
    if (end == n && n - begin < window_anchors) begin = n > window_anchors ? n - window_anchors : 0;

    std::span<const AnchorPair> window(pairs.data() + begin, end - begin);
    try {
      if (planarity_ratio(pairs, begin, end) < kWindowConditioning) {
        throw Error(Errc::DegenerateGeometry, "window too close to collinear");
      }
      TransformKnot knot;
      knot.transform = umeyama_align(window);
      knot.center = window.front().t + (window.back().t - window.front().t) / 2;
      knot.n_anchors = window.size();
      if (out.knots.empty() || knot.center > out.knots.back().center) out.knots.push_back(knot);
    } catch (const Error&) {
      ++out.skipped_windows;
    }
    if (end == n) break;
    begin += std::max<std::size_t>((end - begin) / 2, 1);
  }
  if (out.knots.empty()) throw Error(Errc::DegenerateGeometry, "no usable piecewise alignment window");
  return out;
}

FusedTrajectory fuse_trajectory(const SampleSeries<SlamPose>& slam, const PiecewiseAlignment& alignment,
                                const Geodetic& origin) {
  std::vector<EnuPoint> enu;
  enu.reserve(slam.size());
  for (std::size_t i = 0; i < slam.size(); ++i) enu.push_back(alignment.apply(slam.time(i), slam.value(i).position));
  return make_trajectory({slam.times().begin(), slam.times().end()}, enu, origin);
}

LocatedPoint locate(const FusedTrajectory& traj, Timestamp t) {
  if (traj.empty() || t < traj.points.front().t || t > traj.points.back().t) {
    throw Error(Errc::OutOfRange, "time " + std::to_string(t.micros_utc) + " outside trajectory");
  }
  auto it = std::lower_bound(traj.points.begin(), traj.points.end(), t,
                             [](const TrajectoryPoint& p, Timestamp v) { return p.t < v; });
  if (it->t == t) return {it->enu, it->geo, it->arc_m};
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double alpha = to_seconds(t - a.t) / to_seconds(b.t - a.t);
  LocatedPoint out;
  out.enu = a.enu + alpha * (b.enu - a.enu);
  out.arc_m = a.arc_m + alpha * (b.arc_m - a.arc_m);
  out.geo = enu_to_wgs84(out.enu, traj.origin);
  return out;
}

Timestamp time_at_arc(const FusedTrajectory& traj, double arc_m) {
  if (traj.empty()) throw Error(Errc::OutOfRange, "empty trajectory");
  if (arc_m <= traj.points.front().arc_m) return traj.points.front().t;
  if (arc_m >= traj.points.back().arc_m) {
    auto first = std::lower_bound(traj.points.begin(), traj.points.end(), traj.points.back().arc_m,
                                  [](const TrajectoryPoint& p, double v) { return p.arc_m < v; });
    return first->t;
  }
  auto it = std::lower_bound(traj.points.begin(), traj.points.end(), arc_m,
                             [](const TrajectoryPoint& p, double v) { return p.arc_m < v; });
  if (it->arc_m == arc_m) return it->t;
  const auto& a = *(it - 1);
  const double alpha = (arc_m - a.arc_m) / (it->arc_m - a.arc_m);
  return a.t + Duration{std::llround(alpha * static_cast<double>((it->t - a.t).count()))};
}

AlignmentResult align_session(const SampleSeries<GpsFix>& gps, const SampleSeries<SlamPose>& slam,
                              const GeoParams& params) {
  AlignmentResult out;
  if (slam.empty()) throw Error(Errc::EmptyStream, "SLAM pose stream is empty");
  out.selection = select_gps_anchors(gps, params.gate);
  if (out.selection.anchors.empty()) throw Error(Errc::InsufficientAnchors, "no GPS fix passed the anchor gate");
  out.origin = to_geodetic(out.selection.anchors.value(0));
  out.pairs = pair_anchors(slam, out.selection.anchors, out.origin, params.pair_tol, params.use_altitude);
  if (out.pairs.size() < 3) {
    throw Error(Errc::InsufficientAnchors, "only " + std::to_string(out.pairs.size()) + " anchors paired with SLAM");
  }
  check_anchor_spread(out.pairs, params.min_anchor_diag_m);
  out.global = umeyama_align(out.pairs);
  out.anchor_residual_rms_m = residual_rms(out.pairs, out.global);
  if (params.piecewise) {
    out.piecewise = piecewise_align(out.pairs, params.piecewise_window_anchors);
    out.trajectory = fuse_trajectory(slam, *out.piecewise, out.origin);
  } else {
    out.trajectory = fuse_trajectory(slam, out.global, out.origin);
  }
  return out;
}

}  // namespace mobiscope
