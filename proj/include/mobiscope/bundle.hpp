#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mobiscope/fusion.hpp"

namespace mobiscope {

inline constexpr const char* kBundleFormat = "mobiscope-bundle/1";

/// Everything one fused session produces; the unit written to and read back
/// from a bundle directory.
struct SessionBundle {
  std::string session_id;
  nlohmann::json manifest;    // echo of the session manifest
  nlohmann::json parameters;  // every effective parameter
  std::string segment_spec;
  std::vector<std::string> warnings;

  Geodetic origin;
  SimilarityTransform transform;
  std::optional<PiecewiseAlignment> piecewise;
  double anchor_residual_rms_m = 0.0;
  std::size_t n_anchors = 0;
  std::size_t n_rejected_fixes = 0;
  FusedTrajectory trajectory;

  std::vector<Fixation> fixations;
  std::vector<GazeTargetRecord> targets;
  std::vector<ScrPeak> scr;
  std::vector<StrideEvent> strides_left;
  std::vector<StrideEvent> strides_right;
  std::vector<WidthEstimate> widths;
  std::vector<std::pair<Timestamp, MaterialLabel>> materials;

  std::optional<AttentionMetrics> attention;
  std::optional<GaitMetrics> gait;

  SampleSeries<double> eda_phasic;
  std::vector<PhysioWindow> physio_windows;
  std::vector<GaitWindow> gait_windows;

  std::vector<ExperiencedSegment> segments;
  HotspotReport hotspots;

  bool operator==(const SessionBundle&) const = default;
};

/// Writes bundle.json, trajectory.json, events.json, windows.json and
/// segments.geojson into `dir` (created if needed).
void export_bundle(const SessionBundle& bundle, const std::filesystem::path& dir);

/// IoError when bundle.json is missing, VersionError on an unknown format.
SessionBundle load_bundle(const std::filesystem::path& dir);

/// Reads bundle.json only and checks its format field.
nlohmann::json read_bundle_index(const std::filesystem::path& dir);

}  // namespace mobiscope
