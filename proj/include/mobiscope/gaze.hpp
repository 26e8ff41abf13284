#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mobiscope/core.hpp"
#include "mobiscope/ingest.hpp"

namespace mobiscope {

struct Fixation {
  Timestamp t_start;
  Timestamp t_end;
  double cx = 0.0;  // centroid, normalized
  double cy = 0.0;
  double disp_h = 0.0;
  double disp_v = 0.0;
  std::size_t n_samples = 0;
  double theta = 0.0;  // dispersion threshold in force when the fixation was emitted

  Duration length() const { return t_end - t_start; }
  Timestamp midpoint() const { return t_start + (t_end - t_start) / 2; }
  bool operator==(const Fixation&) const = default;
};

struct CompensatedGaze {
  SampleSeries<GazeSample> gaze;
  /// Samples outside the flow stream's time range, passed through unchanged.
  std::vector<bool> uncovered;
  std::size_t uncovered_count = 0;
};

/// Cumulative scene shift up to and including `t`: the sum of every flow
/// displacement stamped at or before `t`.
std::pair<double, double> cumulative_shift(const SampleSeries<HeadFlow>& flow, Timestamp t);

/// World-stabilized gaze: each sample minus the cumulative scene shift at its
/// time.
CompensatedGaze compensate_head_motion(const SampleSeries<GazeSample>& gaze, const SampleSeries<HeadFlow>& flow);

struct Dispersion {
  double h = 0.0;
  double v = 0.0;
};

/// max - min extent on each axis; EmptyWindow for an empty window.
Dispersion dispersion(std::span<const GazeSample> window);

struct IdtParams {
  Duration min_duration{100'000};
  double theta_base = 0.03;
  double k_noise = 3.0;
  Duration noise_window{1'000'000};
  double min_confidence = 0.6;
};

/// Dispersion-threshold identification. The threshold adapts to the robust
/// (1.4826 * MAD) spread of sample-to-sample displacement over the trailing
/// noise window, floored at theta_base.
std::vector<Fixation> detect_fixations_idt(const SampleSeries<GazeSample>& gaze, const IdtParams& params);

/// Moves world-stabilized fixation centroids back into scene-camera
/// coordinates at each fixation's midpoint.
std::vector<Fixation> project_to_scene(std::span<const Fixation> fixations, const SampleSeries<HeadFlow>& flow);

struct GazeTargetRecord {
  Fixation fixation;
  std::string class_name;
  Timestamp raster_t;

  bool operator==(const GazeTargetRecord&) const = default;
};

struct IntersectionResult {
  std::vector<GazeTargetRecord> records;
  std::size_t unmatched = 0;        // no raster within tolerance
  std::size_t outside_frame = 0;    // centroid outside [0,1]^2
};

/// Nearest raster to each fixation midpoint within `tol`; class looked up at
/// cell (floor(cx * W), floor(cy * H)).
IntersectionResult intersect_fixations(std::span<const Fixation> fixations, const SampleSeries<LabelRaster>& rasters,
                                       Duration tol);

struct AttentionMetrics {
  double fixation_rate_per_min = 0.0;
  double mean_duration_ms = 0.0;
  double mean_disp_h = 0.0;
  double mean_disp_v = 0.0;
  std::map<std::string, double> dwell_by_class;  // ms

  bool operator==(const AttentionMetrics&) const = default;
};

AttentionMetrics attention_metrics(std::span<const Fixation> fixations, std::span<const GazeTargetRecord> targets,
                                   Duration span);

/// Small-angle conversion of normalized extents for a camera field of view.
Dispersion dispersion_degrees(const Dispersion& normalized, double fov_h_deg, double fov_v_deg);

}  // namespace mobiscope
