#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mobiscope/core.hpp"
#include "mobiscope/ingest.hpp"

namespace mobiscope {

enum class Foot { left, right };

std::string_view to_string(Foot foot);

struct StrideEvent {
  Timestamp t_heel_strike;
  Foot foot = Foot::left;
  Timestamp t_midswing_peak;

  bool operator==(const StrideEvent&) const = default;
};

struct GaitParams {
  int axis = 1;  // gyro channel: 0 = gx, 1 = gy, 2 = gz
  double omega_min = 1.0;
  Duration min_stride_gap{400'000};
  double min_rate_hz = 50.0;
  /// Half-width of the search used for peak prominence.
  Duration prominence_window{2'500'000};
};

/// Maps "gx"/"gy"/"gz" to a channel index; throws ManifestError otherwise.
int gyro_axis_from_name(std::string_view name);

/// Mid-swing peaks of the sagittal angular velocity (prominence >= omega_min,
/// spacing >= min_stride_gap); heel strike is the first negative-going zero
/// crossing after each peak, linearly interpolated between samples.
std::vector<StrideEvent> detect_strides(const SampleSeries<ImuSample>& imu, Foot foot, const GaitParams& params);

/// Prominence of sample `peak` within +-`half_width` samples.
double peak_prominence(std::span<const double> x, std::size_t peak, std::size_t half_width);

struct GaitMetrics {
  std::size_t step_count = 0;
  double mean_stride_time_s = 0.0;
  double stv_s = 0.0;
  double stv_cv = 0.0;
  std::optional<double> asymmetry;
  std::size_t excluded_pauses = 0;  // stride times above the pause cutoff

  bool operator==(const GaitMetrics&) const = default;
};

/// Successive heel-strike differences per foot, pooled. Stride times above
/// `max_stride_time` are treated as pauses and left out of the statistics.
/// Standard deviation is the population form.
GaitMetrics gait_metrics(std::span<const StrideEvent> left, std::span<const StrideEvent> right,
                         Duration max_stride_time = Duration{2'500'000});

struct GaitWindow {
  TimeRange span;
  Timestamp t_center;
  double mean_stride_time_s = 0.0;
  double stv_s = 0.0;
  std::size_t n_strides = 0;

  bool operator==(const GaitWindow&) const = default;
};

/// Sliding-window STV: a stride belongs to a window when both of its heel
/// strikes fall inside it. Windows with fewer than two stride times are
/// omitted.
std::vector<GaitWindow> gait_windows(std::span<const StrideEvent> left, std::span<const StrideEvent> right,
                                     Duration win, Duration step, Duration max_stride_time = Duration{2'500'000});

}  // namespace mobiscope
