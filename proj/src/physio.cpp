#include "mobiscope/physio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mobiscope {

EdaDecomposition decompose_eda(const SampleSeries<double>& eda, Duration tonic_window) {
  if (eda.size() < 2 || duration(eda) < tonic_window) {
    throw Error(Errc::WindowTooLong, "EDA series shorter than the tonic window");
  }
  const Duration spacing = median_spacing(eda);
  const auto width = static_cast<std::size_t>(
      std::llround(static_cast<double>(tonic_window.count()) / static_cast<double>(spacing.count())));
  const std::size_t half = width / 2;
  const std::size_t n = eda.size();
  const auto x = eda.values();

  std::vector<double> tonic(n);
  std::vector<double> phasic(n);
  std::vector<double> buf;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(i - h), x.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(h);
    std::nth_element(buf.begin(), mid, buf.end());
    tonic[i] = *mid;
    phasic[i] = x[i] - tonic[i];
  }
  std::vector<Timestamp> ts(eda.times().begin(), eda.times().end());
  return {SampleSeries<double>(ts, std::move(tonic)), SampleSeries<double>(ts, std::move(phasic))};
}

std::vector<ScrPeak> detect_scr_peaks(const SampleSeries<double>& phasic, const ScrParams& params) {
  const auto x = phasic.values();
  const std::size_t n = x.size();
  std::vector<std::pair<std::size_t, ScrPeak>> candidates;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(x[i] > x[i - 1])) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k + 1 < n && x[k + 1] == x[i]) ++k;
    if (k + 1 < n && x[k + 1] < x[i]) {
      std::size_t trough = i;
      while (trough > 0 && x[trough - 1] <= x[trough]) --trough;
      const double amplitude = x[i] - x[trough];
      if (amplitude >= params.min_amplitude_us) {
        candidates.push_back({i, {phasic.time(i), amplitude, to_millis(phasic.time(i) - phasic.time(trough))}});
      }
    }
    i = k + 1;
  }

  // Largest first; exact ties resolved toward the earlier peak.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].second.amplitude_us > candidates[b].second.amplitude_us;
  });
  std::vector<ScrPeak> kept;
  for (std::size_t idx : order) {
    const ScrPeak& p = candidates[idx].second;
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const ScrPeak& q) {
      const Duration gap = p.t_peak > q.t_peak ? p.t_peak - q.t_peak : q.t_peak - p.t_peak;
      return gap < params.refractory;
    });
    if (!clash) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end(), [](const ScrPeak& a, const ScrPeak& b) { return a.t_peak < b.t_peak; });
  return kept;
}

double rmssd(std::span<const double> ibi_ms) {
  if (ibi_ms.size() < 2) throw Error(Errc::InsufficientData, "RMSSD needs at least two intervals");
  double sum = 0.0;
  for (std::size_t i = 1; i < ibi_ms.size(); ++i) {
    const double d = ibi_ms[i] - ibi_ms[i - 1];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(ibi_ms.size() - 1));
}

double pnn10(std::span<const double> ibi_ms) {
  if (ibi_ms.size() < 2) throw Error(Errc::InsufficientData, "pNN10 needs at least two intervals");
  std::size_t over = 0;
  for (std::size_t i = 1; i < ibi_ms.size(); ++i) {
    if (std::abs(ibi_ms[i] - ibi_ms[i - 1]) > 10.0) ++over;
  }
  return static_cast<double>(over) / static_cast<double>(ibi_ms.size() - 1);
}

IbiFilterResult filter_ibi(const SampleSeries<double>& ibi, double min_ms, double max_ms) {
  IbiFilterResult out;
  std::vector<Timestamp> ts;
  std::vector<double> vs;
  for (std::size_t i = 0; i < ibi.size(); ++i) {
    const double v = ibi.value(i);
    if (v < min_ms || v > max_ms) {
      ++out.dropped;
      continue;
    }
    ts.push_back(ibi.time(i));
    vs.push_back(v);
  }
  out.kept = SampleSeries<double>(std::move(ts), std::move(vs));
  return out;
}

std::vector<TimeRange> sliding_windows(Timestamp first, Timestamp last, Duration win, Duration step) {
  if (!(step.count() > 0) || win < step) throw Error(Errc::InvalidRange, "need win >= step > 0");
  std::vector<TimeRange> out;
  for (Timestamp s = first; s + win <= last + Duration{1}; s = s + step) out.push_back({s, s + win});
  return out;
}

std::vector<PhysioWindow> physio_windows(const SampleSeries<double>& ibi, std::span<const ScrPeak> scr, Duration win,
                                         Duration step, std::size_t min_beats) {
  std::vector<PhysioWindow> out;
  if (ibi.empty()) return out;
  for (const TimeRange& w : sliding_windows(ibi.front_time(), ibi.back_time(), win, step)) {
    const std::size_t lo = ibi.lower_index(w.start);
    const std::size_t hi = ibi.lower_index(w.end);
    const std::size_t count = hi - lo;
    if (count < std::max<std::size_t>(min_beats, 2)) continue;
    const auto slice = ibi.values().subspan(lo, count);
    PhysioWindow pw;
    pw.span = w;
    pw.t_center = w.start + win / 2;
    pw.rmssd_ms = rmssd(slice);
    pw.pnn10 = pnn10(slice);
    pw.n_intervals = count;
    const auto peaks = std::count_if(scr.begin(), scr.end(), [&](const ScrPeak& p) { return w.contains(p.t_peak); });
    pw.scr_rate_per_min = static_cast<double>(peaks) / to_minutes(win);
    out.push_back(pw);
  }
  return out;
}

}  // namespace mobiscope
