#include "mobiscope/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mobiscope {

namespace {

/// Prefix sums of the flow stream so that shifts at arbitrary times are O(log n).
struct ShiftTable {
  std::vector<Timestamp> times;
  std::vector<double> du;
  std::vector<double> dv;

  explicit ShiftTable(const SampleSeries<HeadFlow>& flow) {
    times.assign(flow.times().begin(), flow.times().end());
    du.resize(flow.size());
    dv.resize(flow.size());
    double su = 0.0;
    double sv = 0.0;
    for (std::size_t i = 0; i < flow.size(); ++i) {
      su += flow.value(i).du;
      sv += flow.value(i).dv;
      du[i] = su;
      dv[i] = sv;
    }
  }

  std::pair<double, double> at(Timestamp t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return {0.0, 0.0};
    const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
    return {du[i], dv[i]};
  }
};

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::pair<double, double> cumulative_shift(const SampleSeries<HeadFlow>& flow, Timestamp t) {
  return ShiftTable(flow).at(t);
}

CompensatedGaze compensate_head_motion(const SampleSeries<GazeSample>& gaze, const SampleSeries<HeadFlow>& flow) {
  CompensatedGaze out;
  out.uncovered.assign(gaze.size(), false);
  std::vector<GazeSample> values(gaze.values().begin(), gaze.values().end());
  std::size_t j = 0;
  double su = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < gaze.size(); ++i) {
    const Timestamp t = gaze.time(i);
    if (flow.empty() || t < flow.front_time() || t > flow.back_time()) {
      out.uncovered[i] = true;
      ++out.uncovered_count;
      continue;
    }
    while (j < flow.size() && flow.time(j) <= t) {
      su += flow.value(j).du;
      sv += flow.value(j).dv;
      ++j;
    }
    values[i].gx -= su;
    values[i].gy -= sv;
  }
  out.gaze = SampleSeries<GazeSample>({gaze.times().begin(), gaze.times().end()}, std::move(values));
  return out;
}

Dispersion dispersion(std::span<const GazeSample> window) {
  if (window.empty()) throw Error(Errc::EmptyWindow, "dispersion of an empty window");
  double xmin = window.front().gx;
  double xmax = xmin;
  double ymin = window.front().gy;
  double ymax = ymin;
  for (const auto& s : window) {
    xmin = std::min(xmin, s.gx);
    xmax = std::max(xmax, s.gx);
    ymin = std::min(ymin, s.gy);
    ymax = std::max(ymax, s.gy);
  }
  return {xmax - xmin, ymax - ymin};
}

std::vector<Fixation> detect_fixations_idt(const SampleSeries<GazeSample>& gaze, const IdtParams& params) {
  std::vector<Timestamp> ts;
  std::vector<GazeSample> pts;
  for (std::size_t i = 0; i < gaze.size(); ++i) {
    if (gaze.value(i).confidence >= params.min_confidence) {
      ts.push_back(gaze.time(i));
      pts.push_back(gaze.value(i));
    }
  }
  const std::size_t n = pts.size();
  std::vector<double> step(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) step[i] = std::hypot(pts[i].gx - pts[i - 1].gx, pts[i].gy - pts[i - 1].gy);

  std::vector<double> scratch;
  auto threshold_at = [&](std::size_t i) {
    scratch.clear();
    for (std::size_t k = i; k >= 1; --k) {
      if (ts[i] - ts[k] >= params.noise_window) break;
      scratch.push_back(step[k]);
    }
    if (scratch.size() < 2) return params.theta_base;
    const double med = median_of(scratch);
    for (auto& v : scratch) v = std::abs(v - med);
    const double mad = median_of(scratch);
    return std::max(params.theta_base, params.k_noise * 1.4826 * mad);
  };

  std::vector<Fixation> out;
  std::size_t i = 0;
  while (i + 1 < n) {
    // Smallest window starting at i that spans min_duration.
    std::size_t j = i + 1;
    while (j < n && ts[j] - ts[i] < params.min_duration) ++j;
    if (j >= n) break;

    const double theta = threshold_at(i);
    double xmin = pts[i].gx, xmax = xmin, ymin = pts[i].gy, ymax = ymin;
    for (std::size_t k = i + 1; k <= j; ++k) {
      xmin = std::min(xmin, pts[k].gx);
      xmax = std::max(xmax, pts[k].gx);
      ymin = std::min(ymin, pts[k].gy);
      ymax = std::max(ymax, pts[k].gy);
    }
    if ((xmax - xmin) + (ymax - ymin) > theta) {
      ++i;
      continue;
    }
    while (j + 1 < n) {
      const auto& p = pts[j + 1];
      const double nxmin = std::min(xmin, p.gx), nxmax = std::max(xmax, p.gx);
      const double nymin = std::min(ymin, p.gy), nymax = std::max(ymax, p.gy);
      if ((nxmax - nxmin) + (nymax - nymin) > theta) break;
      xmin = nxmin, xmax = nxmax, ymin = nymin, ymax = nymax;
      ++j;
    }
    Fixation f;
    f.t_start = ts[i];
    f.t_end = ts[j];
    f.n_samples = j - i + 1;
    for (std::size_t k = i; k <= j; ++k) {
      f.cx += pts[k].gx;
      f.cy += pts[k].gy;
    }
    f.cx /= static_cast<double>(f.n_samples);
    f.cy /= static_cast<double>(f.n_samples);
    f.disp_h = xmax - xmin;
    f.disp_v = ymax - ymin;
    f.theta = theta;
    out.push_back(f);
    i = j + 1;
  }
  return out;
}

std::vector<Fixation> project_to_scene(std::span<const Fixation> fixations, const SampleSeries<HeadFlow>& flow) {
  const ShiftTable table(flow);
  std::vector<Fixation> out(fixations.begin(), fixations.end());
  for (auto& f : out) {
    const auto [su, sv] = table.at(f.midpoint());
    f.cx += su;
    f.cy += sv;
  }
  return out;
}

IntersectionResult intersect_fixations(std::span<const Fixation> fixations, const SampleSeries<LabelRaster>& rasters,
                                       Duration tol) {
  IntersectionResult out;
  for (const auto& f : fixations) {
    const Timestamp mid = f.midpoint();
    std::size_t best = rasters.size();
    Duration best_gap = Duration::max();
    const std::size_t hi = rasters.lower_index(mid);
    for (std::size_t c : {hi == 0 ? rasters.size() : hi - 1, hi}) {
      if (c >= rasters.size()) continue;
      const Duration gap = rasters.time(c) > mid ? rasters.time(c) - mid : mid - rasters.time(c);
      if (gap < best_gap) {
        best_gap = gap;
        best = c;
      }
    }
    if (best == rasters.size() || best_gap > tol) {
      ++out.unmatched;
      continue;
    }
    if (f.cx < 0.0 || f.cx > 1.0 || f.cy < 0.0 || f.cy > 1.0) {
      ++out.outside_frame;
      continue;
    }
    const LabelRaster& r = rasters.value(best);
    const int col = std::min(r.width - 1, static_cast<int>(std::floor(f.cx * r.width)));
    const int row = std::min(r.height - 1, static_cast<int>(std::floor(f.cy * r.height)));
    out.records.push_back({f, r.legend.at(r.class_at(col, row)), rasters.time(best)});
  }
  return out;
}

AttentionMetrics attention_metrics(std::span<const Fixation> fixations, std::span<const GazeTargetRecord> targets,
                                   Duration span) {
  if (span.count() <= 0) throw Error(Errc::InvalidRange, "attention span must be positive");
  AttentionMetrics m;
  if (fixations.empty()) return m;
  const double n = static_cast<double>(fixations.size());
  m.fixation_rate_per_min = n / to_minutes(span);
  for (const auto& f : fixations) {
    m.mean_duration_ms += to_millis(f.length());
    m.mean_disp_h += f.disp_h;
    m.mean_disp_v += f.disp_v;
  }
  m.mean_duration_ms /= n;
  m.mean_disp_h /= n;
  m.mean_disp_v /= n;
  for (const auto& t : targets) m.dwell_by_class[t.class_name] += to_millis(t.fixation.length());
  return m;
}

Dispersion dispersion_degrees(const Dispersion& normalized, double fov_h_deg, double fov_v_deg) {
  return {normalized.h * fov_h_deg, normalized.v * fov_v_deg};
}

}  // namespace mobiscope
