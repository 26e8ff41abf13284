#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobiscope/core.hpp"
#include "mobiscope/gait.hpp"
#include "mobiscope/gaze.hpp"
#include "mobiscope/geo_fusion.hpp"
#include "mobiscope/physio.hpp"
#include "mobiscope/walkway.hpp"

namespace mobiscope {

struct SegmentSpec {
  enum class Mode { by_distance, by_time };
  Mode mode = Mode::by_distance;
  double length = 10.0;  // metres or seconds
  double min_fill = 0.5;

  bool operator==(const SegmentSpec&) const = default;
};

/// "distance:10" or "time:30".
SegmentSpec parse_segment_spec(const std::string& text, double min_fill = 0.5);
std::string to_string(const SegmentSpec& spec);

struct MetricValue {
  std::optional<double> value;
  double coverage = 0.0;

  bool operator==(const MetricValue&) const = default;
};

/// Scalar metrics carried by every segment, in export order.
const std::vector<std::string>& segment_metric_names();

struct ExperiencedSegment {
  std::size_t index = 0;
  Timestamp t_start;
  Timestamp t_end;
  double arc_start_m = 0.0;
  double arc_end_m = 0.0;
  std::vector<Geodetic> geometry;  // polyline slice, interpolated ends

  std::map<std::string, MetricValue> metrics;
  std::optional<std::map<std::string, double>> dwell_by_class;  // ms; absent without gaze
  double dwell_coverage = 0.0;
  std::optional<std::string> material_mode;
  double material_coverage = 0.0;

  TimeRange span() const { return {t_start, t_end}; }
  bool operator==(const ExperiencedSegment&) const = default;
};

/// Distance mode cuts at multiples of the length along arc; time mode at equal
/// time steps. A trailing partial segment survives when it covers at least
/// min_fill of a full one.
std::vector<ExperiencedSegment> build_segments(const FusedTrajectory& traj, const SegmentSpec& spec);

/// Everything the per-segment metrics draw on. An absent range means the
/// modality was not recorded.
struct SegmentInputs {
  std::optional<TimeRange> gaze_range;
  std::vector<Fixation> fixations;
  std::vector<GazeTargetRecord> targets;

  std::optional<TimeRange> eda_range;
  std::vector<ScrPeak> scr;
  std::vector<PhysioWindow> physio;

  std::optional<TimeRange> imu_range;
  std::vector<StrideEvent> strides;
  std::vector<GaitWindow> gait;

  std::optional<TimeRange> width_range;
  std::vector<WidthEstimate> widths;

  std::optional<TimeRange> material_range;
  std::vector<std::pair<Timestamp, MaterialLabel>> materials;
};

/// Point events go to the segment holding their timestamp (fixations by
/// midpoint); windowed series are averaged with overlap-duration weights.
void attach_metrics(std::vector<ExperiencedSegment>& segments, const SegmentInputs& inputs);

struct HotspotReport {
  std::vector<std::string> metrics;
  double z_thresh = 2.0;
  double min_coverage = 0.5;
  /// Per segment: z-score for each metric the segment was usable for.
  std::vector<std::map<std::string, double>> zscores;
  std::vector<bool> hotspot;
  std::vector<bool> coincidence;
  /// Metrics skipped for lack of usable segments, with the reason.
  std::map<std::string, std::string> insufficient;

  bool operator==(const HotspotReport&) const = default;
};

/// Population-SD z-scores over segments whose coverage reaches min_coverage.
/// Coincidence: SCR rate and either fixation dispersion both at or above the
/// threshold.
HotspotReport hotspot_zscores(const std::vector<ExperiencedSegment>& segments, const std::vector<std::string>& metrics,
                              double z_thresh, double min_coverage = 0.5);

/// RFC 7946 FeatureCollection: the whole trajectory first, then one
/// LineString per segment. Positions are [lon, lat, h].
nlohmann::json export_geojson(const FusedTrajectory& traj, const std::vector<ExperiencedSegment>& segments,
                              const HotspotReport& report);

/// Inverse of the segment features of export_geojson. Fills the per-segment
/// parts of `report` (z-scores and flags).
std::vector<ExperiencedSegment> segments_from_geojson(const nlohmann::json& doc, HotspotReport& report);

/// Position at arc length `arc_m`, clamped to the trajectory ends.
LocatedPoint locate_arc(const FusedTrajectory& traj, double arc_m);

}  // namespace mobiscope
