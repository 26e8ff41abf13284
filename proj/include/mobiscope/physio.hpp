#pragma once

#include <span>
#include <vector>

#include "mobiscope/core.hpp"

namespace mobiscope {

struct EdaDecomposition {
  SampleSeries<double> tonic;
  SampleSeries<double> phasic;
};

/// Tonic level is a centered moving median over `tonic_window`; the window
/// shrinks symmetrically near the ends. Phasic is the remainder.
EdaDecomposition decompose_eda(const SampleSeries<double>& eda, Duration tonic_window);

struct ScrPeak {
  Timestamp t_peak;
  double amplitude_us = 0.0;
  double rise_time_ms = 0.0;

  bool operator==(const ScrPeak&) const = default;
};

struct ScrParams {
  double min_amplitude_us = 0.05;
  Duration refractory{1'000'000};
};

/// Local maxima of the phasic signal, amplitude measured from the preceding
/// local minimum. Peaks closer than the refractory period keep the larger
/// (earlier on an exact tie).
std::vector<ScrPeak> detect_scr_peaks(const SampleSeries<double>& phasic, const ScrParams& params);

/// Root mean square of successive differences, ms. Needs >= 2 intervals.
double rmssd(std::span<const double> ibi_ms);
/// Fraction of successive differences strictly greater than 10 ms.
double pnn10(std::span<const double> ibi_ms);

struct IbiFilterResult {
  SampleSeries<double> kept;
  std::size_t dropped = 0;
};

/// Drops physiologically impossible intervals outside [min_ms, max_ms].
IbiFilterResult filter_ibi(const SampleSeries<double>& ibi, double min_ms = 300.0, double max_ms = 2000.0);

struct PhysioWindow {
  TimeRange span;
  Timestamp t_center;
  double rmssd_ms = 0.0;
  double pnn10 = 0.0;
  std::size_t n_intervals = 0;
  double scr_rate_per_min = 0.0;

  bool operator==(const PhysioWindow&) const = default;
};

/// Half-open sliding windows [start, start + win) stepped from the first IBI
/// while the window fits inside the IBI time range.
std::vector<TimeRange> sliding_windows(Timestamp first, Timestamp last, Duration win, Duration step);

/// Windows with fewer than `min_beats` intervals are omitted.
std::vector<PhysioWindow> physio_windows(const SampleSeries<double>& ibi, std::span<const ScrPeak> scr, Duration win,
                                         Duration step, std::size_t min_beats = 20);

}  // namespace mobiscope
