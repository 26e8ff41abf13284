#include "mobiscope/score.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mobiscope/geodesy.hpp"

namespace mobiscope {

using nlohmann::json;

namespace {

Duration period_tolerance(double period_s) { return Duration{std::llround(period_s * 1e6)}; }

Duration abs_gap(Timestamp a, Timestamp b) { return a > b ? a - b : b - a; }

void finish(DetectionScore& s) {
  if (s.n_detected > 0) s.precision = static_cast<double>(s.n_matched) / static_cast<double>(s.n_detected);
  if (s.n_truth > 0) s.recall = static_cast<double>(s.n_matched) / static_cast<double>(s.n_truth);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const TruthStretch* stretch_at(const std::vector<TruthStretch>& stretches, Timestamp t) {
  for (const auto& s : stretches) {
    if (s.t_start <= t && t < s.t_end) return &s;
  }
  return nullptr;
}

// Rigid map between two local ENU frames, exact up to the geodetic round trip.
SimilarityTransform frame_change(const Geodetic& from, const Geodetic& to) {
  auto f = [&](const Eigen::Vector3d& x) { return wgs84_to_enu(enu_to_wgs84(x, from), to); };
  SimilarityTransform out;
  out.translation = f(Eigen::Vector3d::Zero());
  for (int k = 0; k < 3; ++k) out.rotation.col(k) = f(Eigen::Vector3d::Unit(k) * 1000.0) - out.translation;
  out.rotation /= 1000.0;
  return out;
}

}  // namespace

json DetectionScore::to_json() const {
  return {{"n_truth", n_truth}, {"n_detected", n_detected}, {"n_matched", n_matched},
          {"precision", opt(precision)}, {"recall", opt(recall)}};
}

bool TruthScore::all_detectors_perfect() const {
  for (const auto* d : {&fixations, &scr, &strides}) {
    if (d->n_truth == 0) continue;
    if (!d->precision || !d->recall || *d->precision != 1.0 || *d->recall != 1.0) return false;
  }
  return true;
}

json TruthScore::to_json() const {
  return {{"session_id", session_id},
          {"fixations", fixations.to_json()},
          {"scr", scr.to_json()},
          {"strides", strides.to_json()},
          {"target_class_agreement", opt(target_class_agreement)},
          {"transform",
           {{"scale_rel_error", scale_rel_error},
            {"rotation_error_deg", rotation_error_deg},
            {"translation_error_m", translation_error_m}}},
          {"trajectory", {{"rmse_m", trajectory_rmse_m}, {"max_error_m", trajectory_max_error_m}}},
          {"material_accuracy", opt(material_accuracy)},
          {"width_mae_m", opt(width_mae_m)}};
}

DetectionScore score_events(const std::vector<Timestamp>& truth, const std::vector<Timestamp>& detected,
                            Duration tolerance) {
  DetectionScore s;
  s.n_truth = truth.size();
  s.n_detected = detected.size();
  std::vector<Timestamp> t = truth, d = detected;
  std::sort(t.begin(), t.end());
  std::sort(d.begin(), d.end());
  std::vector<bool> used(d.size(), false);
  std::size_t lo = 0;
  for (const auto& ti : t) {
    while (lo < d.size() && d[lo] < ti - tolerance) ++lo;
    for (std::size_t j = lo; j < d.size() && d[j] <= ti + tolerance; ++j) {
      if (!used[j]) {
        used[j] = true;
        ++s.n_matched;
        break;
      }
    }
  }
  finish(s);
  return s;
}

TruthScore score_against_truth(const SessionBundle& bundle, const GroundTruth& truth) {
  if (bundle.session_id != truth.session_id) {
    throw Error(Errc::ScenarioMismatch,
                "bundle session '" + bundle.session_id + "' does not match truth session '" + truth.session_id + "'");
  }
  TruthScore out;
  out.session_id = truth.session_id;

  // Fixations: both boundaries within one gaze period.
  {
    const Duration tol = period_tolerance(truth.gaze_period_s);
    DetectionScore& s = out.fixations;
    s.n_truth = truth.fixations.size();
    s.n_detected = bundle.fixations.size();
    std::map<Timestamp, std::string> detected_class;
    for (const auto& r : bundle.targets) detected_class[r.fixation.t_start] = r.class_name;
    std::vector<bool> used(bundle.fixations.size(), false);
    std::size_t agree = 0, compared = 0;
    for (const auto& tf : truth.fixations) {
      for (std::size_t j = 0; j < bundle.fixations.size(); ++j) {
        const auto& f = bundle.fixations[j];
        if (used[j] || abs_gap(f.t_start, tf.t_start) > tol || abs_gap(f.t_end, tf.t_end) > tol) continue;
        used[j] = true;
        ++s.n_matched;
        if (auto it = detected_class.find(f.t_start); it != detected_class.end()) {
          ++compared;
          if (it->second == tf.class_name) ++agree;
        }
        break;
      }
    }
    finish(s);
    if (compared > 0) out.target_class_agreement = static_cast<double>(agree) / static_cast<double>(compared);
  }

  {
    std::vector<Timestamp> det;
    for (const auto& p : bundle.scr) det.push_back(p.t_peak);
    out.scr = score_events(truth.scr_peaks, det, period_tolerance(truth.eda_period_s));
  }
  {
    const Duration tol = period_tolerance(truth.imu_period_s);
    auto strikes = [](const std::vector<StrideEvent>& v) {
      std::vector<Timestamp> t;
      for (const auto& e : v) t.push_back(e.t_heel_strike);
      return t;
    };
    const auto l = score_events(truth.heel_strikes_left, strikes(bundle.strides_left), tol);
    const auto r = score_events(truth.heel_strikes_right, strikes(bundle.strides_right), tol);
    out.strides.n_truth = l.n_truth + r.n_truth;
    out.strides.n_detected = l.n_detected + r.n_detected;
    out.strides.n_matched = l.n_matched + r.n_matched;
    finish(out.strides);
  }

  // Truth re-expressed in the bundle's ENU frame.
  const SimilarityTransform to_bundle = frame_change(truth.origin, bundle.origin);

  // Transform parameters against the global fit.
  {
    const auto& est = bundle.transform;
    SimilarityTransform tr = truth.transform;
    tr.rotation = to_bundle.rotation * truth.transform.rotation;
    tr.translation = to_bundle.apply(truth.transform.translation);
    out.scale_rel_error = std::abs(est.scale - tr.scale) / tr.scale;
    const Eigen::Matrix3d d = est.rotation * tr.rotation.transpose();
    const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
    out.rotation_error_deg = std::acos(c) * 180.0 / std::numbers::pi;
    out.translation_error_m = (est.translation - tr.translation).norm();
  }

  // Trajectory error at shared timestamps, in the truth's ENU frame.
  {
    std::map<Timestamp, std::size_t> index;
    for (std::size_t i = 0; i < truth.route_t.size(); ++i) index[truth.route_t[i]] = i;
    double sum = 0.0, worst = 0.0;
    std::size_t n = 0;
    for (const auto& p : bundle.trajectory.points) {
      const auto it = index.find(p.t);
      if (it == index.end()) continue;
      const double e = (p.enu - to_bundle.apply(truth.route_enu[it->second])).norm();
      sum += e * e;
      worst = std::max(worst, e);
      ++n;
    }
    if (n > 0) out.trajectory_rmse_m = std::sqrt(sum / static_cast<double>(n));
    out.trajectory_max_error_m = worst;
  }

  if (!truth.stretches.empty()) {
    std::size_t hit = 0, n = 0;
    for (const auto& [t, label] : bundle.materials) {
      if (const auto* s = stretch_at(truth.stretches, t)) {
        ++n;
        if (s->material == label.class_name) ++hit;
      }
    }
    if (n > 0) out.material_accuracy = static_cast<double>(hit) / static_cast<double>(n);
    double err = 0.0;
    std::size_t m = 0;
    for (const auto& w : bundle.widths) {
      if (const auto* s = stretch_at(truth.stretches, w.t)) {
        err += std::abs(w.width_m - s->width_m);
        ++m;
      }
    }
    if (m > 0) out.width_mae_m = err / static_cast<double>(m);
  }
  return out;
}

}  // namespace mobiscope
