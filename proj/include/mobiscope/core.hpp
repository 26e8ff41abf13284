#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mobiscope/error.hpp"

namespace mobiscope {

using Duration = std::chrono::microseconds;

/// Microseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t micros_utc = 0;

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(Duration d) const { return {micros_utc + d.count()}; }
  constexpr Timestamp operator-(Duration d) const { return {micros_utc - d.count()}; }
  constexpr Duration operator-(Timestamp other) const { return Duration{micros_utc - other.micros_utc}; }

  constexpr double seconds() const { return static_cast<double>(micros_utc) * 1e-6; }
};

constexpr Timestamp from_micros(std::int64_t us) { return Timestamp{us}; }

inline Duration seconds_to_duration(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }
inline double to_millis(Duration d) { return static_cast<double>(d.count()) * 1e-3; }
inline double to_minutes(Duration d) { return static_cast<double>(d.count()) / 60e6; }

/// Timestamped stream with strictly increasing times. Immutable once built.
template <typename V>
class SampleSeries {
 public:
  using value_type = V;

  SampleSeries() = default;

  SampleSeries(std::vector<Timestamp> timestamps, std::vector<V> values)
      : timestamps_(std::move(timestamps)), values_(std::move(values)) {
    if (timestamps_.size() != values_.size()) {
      throw Error(Errc::InvalidRange, "timestamp and value counts differ");
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
      if (timestamps_[i] <= timestamps_[i - 1]) {
        throw Error(Errc::StreamOrderError,
                    "timestamps not strictly increasing at index " + std::to_string(i));
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  Timestamp time(std::size_t i) const { return timestamps_[i]; }
  const V& value(std::size_t i) const { return values_[i]; }

  Timestamp front_time() const { return timestamps_.front(); }
  Timestamp back_time() const { return timestamps_.back(); }

  std::span<const Timestamp> times() const noexcept { return timestamps_; }
  std::span<const V> values() const noexcept { return values_; }

  /// Index of the first sample with time >= t.
  std::size_t lower_index(Timestamp t) const {
    return static_cast<std::size_t>(
        std::lower_bound(timestamps_.begin(), timestamps_.end(), t) - timestamps_.begin());
  }

  bool operator==(const SampleSeries&) const = default;

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<V> values_;
};

/// Last timestamp minus first.
template <typename V>
Duration duration(const SampleSeries<V>& series) {
  if (series.empty()) throw Error(Errc::EmptyStream, "duration of an empty series");
  return series.back_time() - series.front_time();
}

/// Samples with t0 <= t < t1, order preserved.
template <typename V>
SampleSeries<V> slice_by_time(const SampleSeries<V>& series, Timestamp t0, Timestamp t1) {
  if (t0 > t1) throw Error(Errc::InvalidRange, "slice start after slice end");
  const std::size_t lo = series.lower_index(t0);
  const std::size_t hi = series.lower_index(t1);
  std::vector<Timestamp> ts(series.times().begin() + lo, series.times().begin() + hi);
  std::vector<V> vs(series.values().begin() + lo, series.values().begin() + hi);
  return SampleSeries<V>(std::move(ts), std::move(vs));
}

/// Median spacing between consecutive samples; zero for fewer than two samples.
template <typename V>
Duration median_spacing(const SampleSeries<V>& series) {
  if (series.size() < 2) return Duration{0};
  std::vector<std::int64_t> gaps(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    gaps[i - 1] = (series.time(i) - series.time(i - 1)).count();
  }
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return Duration{*mid};
}

/// Half-open time interval [start, end).
struct TimeRange {
  Timestamp start;
  Timestamp end;

  Duration length() const { return end - start; }
  bool contains(Timestamp t) const { return start <= t && t < end; }
  bool operator==(const TimeRange&) const = default;
};

inline Duration overlap(const TimeRange& a, const TimeRange& b) {
  const Timestamp lo = std::max(a.start, b.start);
  const Timestamp hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : Duration{0};
}

}  // namespace mobiscope
