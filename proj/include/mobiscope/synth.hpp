#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mobiscope/geo_fusion.hpp"
#include "mobiscope/ingest.hpp"
#include "mobiscope/manifest.hpp"
#include "mobiscope/walkway.hpp"

namespace mobiscope {

inline constexpr const char* kTruthFormat = "mobiscope-truth/1";

/// SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Per-stream generator: mt19937_64 seeded from a SplitMix64 sequence.
/// Uniforms take the top 53 bits; normals use Box-Muller on two uniforms so
/// the sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double sd = 1.0);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

/// Stream names in seed-derivation order: gps, slam, gaze, flow, eda, ibi,
/// imu_left, imu_right, skeleton, walkway, material.
const std::vector<std::string>& synth_stream_order();
/// The k-th SplitMix64 output from `seed` goes to the k-th stream.
std::map<std::string, std::uint64_t> derive_stream_seeds(std::uint64_t seed);

struct Interval {
  double start_s = 0.0;
  double duration_s = 0.0;
};

struct WalkwayStretch {
  double start_s = 0.0;
  double width_m = 1.5;
  std::string material = "concrete";
};

struct SynthScenario {
  std::string session_id = "synth";
  std::uint64_t seed = 1;
  std::int64_t start_us = 1'700'000'000'000'000;
  double duration_s = 300.0;
  Geodetic origin{1.2966, 103.7764, 0.0};
  double stature_m = 1.70;

  std::vector<Eigen::Vector2d> waypoints;  // ENU metres; empty = default block
  double speed_mps = 1.3;
  bool closed_route = true;

  double gps_rate_hz = 1.0;
  double gps_noise_sigma_m = 0.0;
  double gps_h_acc_m = 3.0;
  std::vector<Interval> gps_dropouts;
  double dropout_h_acc_m = 35.0;

  double slam_rate_hz = 30.0;
  double slam_scale = 0.8;
  double slam_yaw_deg = 30.0;
  double slam_pitch_deg = 2.0;
  double slam_roll_deg = -1.5;
  Eigen::Vector3d slam_translation{12.0, -7.0, 1.5};
  double drift_fraction = 0.0;  // ENU error per metre walked
  double drift_heading_deg = 45.0;

  bool gaze = true;
  double gaze_rate_hz = 100.0;
  double gaze_noise = 0.005;  // half-width of the uniform jitter
  double fix_min_s = 0.2;
  double fix_max_s = 0.8;
  double pan_amplitude = 0.04;
  double pan_period_s = 7.0;
  double raster_rate_hz = 1.0;
  int raster_size = 8;
  std::vector<std::string> scene_classes = {"sidewalk", "road", "building", "vegetation", "signage", "sky"};

  bool eda = true;
  double eda_rate_hz = 4.0;
  double tonic_base_us = 2.0;
  double tonic_slope_us_per_min = 0.02;
  std::size_t scr_count = 5;
  double scr_min_amp_us = 0.2;
  double scr_max_amp_us = 1.0;
  double scr_sigma_s = 0.5;

  bool ibi = true;
  double ibi_mean_ms = 800.0;
  double ibi_sd_ms = 40.0;

  bool imu = true;
  double imu_rate_hz = 100.0;
  double stride_mean_left_s = 1.05;
  double stride_mean_right_s = 1.05;
  double stride_sd_s = 0.03;
  double gyro_amplitude = 2.0;

  bool walkway = true;
  double walkway_rate_hz = 5.0;
  double skeleton_px_min = 300.0;
  double skeleton_px_max = 400.0;
  std::vector<WalkwayStretch> stretches;  // repeats every stretch_period_s
  double stretch_period_s = 0.0;

  bool material = true;
  double material_rate_hz = 1.0;
  int embedding_dim = 16;
  double embedding_noise = 0.1;

  nlohmann::json parameters = nlohmann::json::object();  // manifest overrides

  /// Missing members keep their defaults; unknown members are rejected.
  static SynthScenario from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

SynthScenario load_scenario(const std::filesystem::path& path);

/// Constant-speed walk along a polyline, looping when closed.
class RouteModel {
 public:
  RouteModel(std::vector<Eigen::Vector2d> waypoints, double speed_mps, bool closed);
  double length() const { return cumulative_.back(); }
  Eigen::Vector2d at_arc(double arc_m) const;
  Eigen::Vector2d at_time(double t_s) const { return at_arc(speed_ * t_s); }

 private:
  std::vector<Eigen::Vector2d> points_;
  std::vector<double> cumulative_;
  double speed_;
  bool closed_;
};

struct TruthFixation {
  Timestamp t_start;
  Timestamp t_end;
  double wx = 0.0;
  double wy = 0.0;
  std::string class_name;
};

struct TruthStretch {
  Timestamp t_start;
  Timestamp t_end;
  double width_m = 0.0;
  std::string material;
};

struct GroundTruth {
  std::string session_id;
  std::uint64_t seed = 0;
  Geodetic origin;                // ENU frame of route_enu and transform
  SimilarityTransform transform;  // SLAM -> ENU before drift
  double drift_fraction = 0.0;
  std::vector<Timestamp> route_t;
  std::vector<Eigen::Vector3d> route_enu;
  std::vector<Interval> gps_dropouts;
  std::vector<TruthFixation> fixations;
  std::vector<Timestamp> scr_peaks;
  std::vector<double> scr_amplitudes;
  std::vector<Timestamp> heel_strikes_left;
  std::vector<Timestamp> heel_strikes_right;
  std::vector<TruthStretch> stretches;
  double gaze_period_s = 0.0;
  double eda_period_s = 0.0;
  double imu_period_s = 0.0;

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& doc);
};

struct SynthSession {
  nlohmann::json manifest;  // session.json document, paths relative to the session directory
  SampleSeries<GpsFix> gps;
  SampleSeries<SlamPose> slam;
  std::optional<SampleSeries<GazeSample>> gaze;
  std::optional<SampleSeries<HeadFlow>> flow;
  std::optional<SampleSeries<LabelRaster>> rasters;
  std::optional<SampleSeries<double>> eda;
  std::optional<SampleSeries<double>> ibi;
  std::optional<SampleSeries<ImuSample>> imu_left;
  std::optional<SampleSeries<ImuSample>> imu_right;
  std::optional<SampleSeries<SkeletonFrame>> skeleton;
  std::optional<SampleSeries<WalkwayEdges>> edges;
  std::optional<SampleSeries<Embedding>> embeddings;
  std::optional<LinearProbeModel> probe;
  GroundTruth truth;
};

/// Pure function of the scenario (including its seed).
SynthSession synthesize(const SynthScenario& scenario);

/// Writes every stream, probe.csv, session.json and ground_truth.json.
void write_session(const SynthSession& session, const std::filesystem::path& out_dir);

/// synthesize + write_session; returns the manifest as read back from disk.
SessionManifest generate_session(const SynthScenario& scenario, const std::filesystem::path& out_dir);

/// Surface point (h = 0) whose ENU east/north equal `en`, found by fixed-point
/// iteration on the ellipsoid.
Geodetic surface_point_at(const Eigen::Vector2d& en, const Geodetic& origin);

}  // namespace mobiscope
