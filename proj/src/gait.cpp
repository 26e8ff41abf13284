#include "mobiscope/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mobiscope/physio.hpp"

namespace mobiscope {

namespace {

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Stats population_stats(std::span<const double> v) {
  Stats s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

std::vector<double> stride_times(std::span<const StrideEvent> events, Duration max_stride_time,
                                 std::size_t* excluded = nullptr) {
  std::vector<double> out;
  for (std::size_t i = 1; i < events.size(); ++i) {
    const Duration d = events[i].t_heel_strike - events[i - 1].t_heel_strike;
    if (d > max_stride_time) {
      if (excluded) ++*excluded;
      continue;
    }
    out.push_back(to_seconds(d));
  }
  return out;
}

}  // namespace

std::string_view to_string(Foot foot) { return foot == Foot::left ? "left" : "right"; }

int gyro_axis_from_name(std::string_view name) {
  if (name == "gx") return 0;
  if (name == "gy") return 1;
  if (name == "gz") return 2;
  throw Error(Errc::ManifestError, "gait axis must be gx, gy or gz");
}

double peak_prominence(std::span<const double> x, std::size_t peak, std::size_t half_width) {
  const double h = x[peak];
  const std::size_t lo = peak > half_width ? peak - half_width : 0;
  const std::size_t hi = std::min(x.size() - 1, peak + half_width);
  double left_min = h;
  for (std::size_t i = peak; i-- > lo;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = peak + 1; i <= hi; ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

std::vector<StrideEvent> detect_strides(const SampleSeries<ImuSample>& imu, Foot foot, const GaitParams& params) {
  std::vector<StrideEvent> out;
  if (imu.size() < 3) return out;
  const Duration spacing = median_spacing(imu);
  const double rate = 1e6 / static_cast<double>(spacing.count());
  if (rate < params.min_rate_hz) {
    throw Error(Errc::RateError, "IMU rate " + std::to_string(rate) + " Hz below " + std::to_string(params.min_rate_hz));
  }
  const std::size_t n = imu.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = imu.value(i).gyro[params.axis];
  const auto half_width = static_cast<std::size_t>(
      std::max<std::int64_t>(1, params.prominence_window.count() / spacing.count()));

  std::vector<std::size_t> candidates;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(w[i] > w[i - 1])) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k + 1 < n && w[k + 1] == w[i]) ++k;
    if (k + 1 < n && w[k + 1] < w[i] && peak_prominence(w, i, half_width) >= params.omega_min) {
      candidates.push_back(i);
    }
    i = k + 1;
  }

  // Spacing: tallest peaks claim their neighbourhood first, earlier wins ties.
  std::vector<std::size_t> order(candidates);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  std::set<std::int64_t> kept_times;
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const std::int64_t t = imu.time(idx).micros_utc;
    auto next = kept_times.lower_bound(t);
    if (next != kept_times.end() && *next - t < params.min_stride_gap.count()) continue;
    if (next != kept_times.begin() && t - *std::prev(next) < params.min_stride_gap.count()) continue;
    kept_times.insert(t);
    kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());

  for (std::size_t p = 0; p < kept.size(); ++p) {
    const std::size_t limit = p + 1 < kept.size() ? kept[p + 1] : n;
    for (std::size_t k = kept[p] + 1; k < limit; ++k) {
      if (w[k] < 0.0 && w[k - 1] >= 0.0) {
        const double a = w[k - 1] / (w[k - 1] - w[k]);
        const auto dt = static_cast<double>((imu.time(k) - imu.time(k - 1)).count());
        const Timestamp hs = imu.time(k - 1) + Duration{std::llround(a * dt)};
        out.push_back({hs, foot, imu.time(kept[p])});
        break;
      }
    }
  }
  return out;
}

GaitMetrics gait_metrics(std::span<const StrideEvent> left, std::span<const StrideEvent> right,
                         Duration max_stride_time) {
  if (left.size() < 2 && right.size() < 2) {
    throw Error(Errc::InsufficientData, "need at least two heel strikes on one foot");
  }
  GaitMetrics m;
  m.step_count = left.size() + right.size();
  const auto l = stride_times(left, max_stride_time, &m.excluded_pauses);
  const auto r = stride_times(right, max_stride_time, &m.excluded_pauses);
  std::vector<double> pooled(l);
  pooled.insert(pooled.end(), r.begin(), r.end());
  if (pooled.empty()) throw Error(Errc::InsufficientData, "every stride time exceeds the pause cutoff");
  const Stats all = population_stats(pooled);
  m.mean_stride_time_s = all.mean;
  m.stv_s = all.sd;
  m.stv_cv = all.sd / all.mean;
  if (!l.empty() && !r.empty()) {
    m.asymmetry = std::abs(population_stats(l).mean - population_stats(r).mean) / all.mean;
  }
  return m;
}

std::vector<GaitWindow> gait_windows(std::span<const StrideEvent> left, std::span<const StrideEvent> right,
                                     Duration win, Duration step, Duration max_stride_time) {
  std::vector<GaitWindow> out;
  std::vector<std::pair<Timestamp, Timestamp>> strides;
  for (auto events : {left, right}) {
    for (std::size_t i = 1; i < events.size(); ++i) {
      const Timestamp a = events[i - 1].t_heel_strike;
      const Timestamp b = events[i].t_heel_strike;
      if (b - a <= max_stride_time) strides.emplace_back(a, b);
    }
  }
  if (strides.empty()) return out;
  Timestamp first = strides.front().first;
  Timestamp last = strides.front().second;
  for (const auto& [a, b] : strides) {
    first = std::min(first, a);
    last = std::max(last, b);
  }
  for (const TimeRange& w : sliding_windows(first, last, win, step)) {
    std::vector<double> times;
    for (const auto& [a, b] : strides) {
      if (w.contains(a) && w.contains(b)) times.push_back(to_seconds(b - a));
    }
    if (times.size() < 2) continue;
    const Stats s = population_stats(times);
    out.push_back({w, w.start + win / 2, s.mean, s.sd, times.size()});
  }
  return out;
}

}  // namespace mobiscope
