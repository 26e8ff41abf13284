#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mobiscope/core.hpp"
#include "mobiscope/manifest.hpp"

namespace mobiscope {

struct GpsFix {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double h_acc_m = 1.0;

  bool operator==(const GpsFix&) const = default;
};

struct SlamPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  bool operator==(const SlamPose& o) const {
    return position == o.position && orientation.coeffs() == o.orientation.coeffs();
  }
};

/// Gaze in normalized scene-camera coordinates; (0,0) is the top-left corner.
struct GazeSample {
  double gx = 0.0;
  double gy = 0.0;
  double confidence = 1.0;

  bool operator==(const GazeSample&) const = default;
};

/// Scene-camera displacement accumulated over the interval ending at the sample.
struct HeadFlow {
  double du = 0.0;
  double dv = 0.0;

  bool operator==(const HeadFlow&) const = default;
};

struct ImuSample {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // rad/s

  bool operator==(const ImuSample& o) const { return accel == o.accel && gyro == o.gyro; }
};

struct Keypoint {
  double px = 0.0;
  double py = 0.0;
  double confidence = 0.0;

  bool operator==(const Keypoint&) const = default;
};

/// All joints detected in one video frame.
struct SkeletonFrame {
  std::map<std::string, Keypoint> joints;

  bool operator==(const SkeletonFrame&) const = default;
};

struct WalkwayEdges {
  double left_px = 0.0;
  double right_px = 0.0;
  double foot_row_px = 0.0;

  bool operator==(const WalkwayEdges&) const = default;
};

using Embedding = Eigen::VectorXd;

/// Semantic label grid for one scene keyframe, row 0 at the top.
struct LabelRaster {
  int width = 0;
  int height = 0;
  std::vector<int> classes;  // row-major, width * height
  std::map<int, std::string> legend;
  std::string grid_path;
  std::string legend_id;

  int class_at(int col, int row) const { return classes[static_cast<std::size_t>(row * width + col)]; }
  bool operator==(const LabelRaster&) const = default;
};

using StreamData = std::variant<SampleSeries<GpsFix>, SampleSeries<SlamPose>, SampleSeries<GazeSample>,
                                SampleSeries<HeadFlow>, SampleSeries<double>, SampleSeries<ImuSample>,
                                SampleSeries<SkeletonFrame>, SampleSeries<WalkwayEdges>,
                                SampleSeries<Embedding>, SampleSeries<LabelRaster>>;

/// Header columns for a stream kind. Embeddings list e0..e{d-1}; `dim`
/// selects d.
std::vector<std::string> stream_header(StreamKind kind, std::size_t dim = 0);

SampleSeries<GpsFix> read_gps(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<SlamPose> read_slam_poses(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<GazeSample> read_gaze(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<HeadFlow> read_head_flow(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<double> read_eda(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<double> read_ibi(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<ImuSample> read_imu(const std::filesystem::path& path, std::int64_t offset_us = 0);
/// Long format: consecutive rows sharing a timestamp form one frame.
SampleSeries<SkeletonFrame> read_skeleton(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<WalkwayEdges> read_walkway_edges(const std::filesystem::path& path, std::int64_t offset_us = 0);
SampleSeries<Embedding> read_material_embeddings(const std::filesystem::path& path, std::int64_t offset_us = 0);
/// Reads the raster index, each grid file it names, and the legend
/// `legend_<legend_id>.csv` next to the index.
SampleSeries<LabelRaster> read_label_rasters(const std::filesystem::path& index_path, std::int64_t offset_us = 0);

/// Parses a declared stream with its clock offset applied.
StreamData parse_stream(const StreamDecl& decl, const std::filesystem::path& base_dir);

void write_gps(const std::filesystem::path& path, const SampleSeries<GpsFix>& s);
void write_slam_poses(const std::filesystem::path& path, const SampleSeries<SlamPose>& s);
void write_gaze(const std::filesystem::path& path, const SampleSeries<GazeSample>& s);
void write_head_flow(const std::filesystem::path& path, const SampleSeries<HeadFlow>& s);
void write_eda(const std::filesystem::path& path, const SampleSeries<double>& s);
void write_ibi(const std::filesystem::path& path, const SampleSeries<double>& s);
void write_imu(const std::filesystem::path& path, const SampleSeries<ImuSample>& s);
void write_skeleton(const std::filesystem::path& path, const SampleSeries<SkeletonFrame>& s);
void write_walkway_edges(const std::filesystem::path& path, const SampleSeries<WalkwayEdges>& s);
void write_material_embeddings(const std::filesystem::path& path, const SampleSeries<Embedding>& s);
/// Writes the index plus one grid file per raster (at each raster's
/// `grid_path`, relative to the index) and one legend file per legend id.
void write_label_rasters(const std::filesystem::path& index_path, const SampleSeries<LabelRaster>& s);

/// Linear interpolation onto a uniform grid spanning [first, last]; the grid
/// step is rounded to whole microseconds per sample index.
SampleSeries<double> resample_uniform(const SampleSeries<double>& series, double rate_hz);

}  // namespace mobiscope
