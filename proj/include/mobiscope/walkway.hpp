#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobiscope/core.hpp"
#include "mobiscope/ingest.hpp"

namespace mobiscope {

inline constexpr std::size_t kMaterialClasses = 14;

/// Seed taxonomy: the named urban surfaces first, then placeholders.
const std::array<std::string, kMaterialClasses>& default_material_classes();

struct PixelScale {
  double meters_per_pixel = 0.0;
  Timestamp t;
  double source_skeleton_px = 0.0;

  bool operator==(const PixelScale&) const = default;
};

struct WalkwayParams {
  double stature_fraction = 0.93;
  double min_kp_conf = 0.3;
  double min_skeleton_px = 50.0;
  Duration max_scale_age{2'000'000};
  std::string head_joint = "nose";
  std::string left_ankle_joint = "l_ankle";
  std::string right_ankle_joint = "r_ankle";
};

/// Body-height reference: vertical pixel distance from the head joint to the
/// ankle midpoint stands for stature * stature_fraction metres.
PixelScale pixel_scale(const SkeletonFrame& frame, Timestamp t, double stature_m, const WalkwayParams& params);

struct WidthEstimate {
  Timestamp t;
  double width_m = 0.0;
  double width_px = 0.0;

  bool operator==(const WidthEstimate&) const = default;
};

WidthEstimate estimate_width(const WalkwayEdges& edges, Timestamp t, const PixelScale& scale,
                             const WalkwayParams& params);

struct WidthSeriesResult {
  std::vector<WidthEstimate> widths;
  std::size_t skipped_frames = 0;   // skeleton frames that gave no scale
  std::size_t unscaled_edges = 0;   // edge rows without a fresh scale
  std::size_t rejected_edges = 0;   // inverted or zero-width edges
};

/// Per-frame widths: each edge row uses the nearest valid skeleton scale
/// (earlier on ties) if it is no older than max_scale_age.
WidthSeriesResult estimate_widths(const SampleSeries<SkeletonFrame>& skeleton, const SampleSeries<WalkwayEdges>& edges,
                                  double stature_m, const WalkwayParams& params);

struct LinearProbeModel {
  Eigen::MatrixXd weights;  // classes x d
  Eigen::VectorXd bias;
  std::vector<std::string> class_names;

  Eigen::Index embedding_dim() const { return weights.cols(); }
  bool operator==(const LinearProbeModel& o) const {
    return weights == o.weights && bias == o.bias && class_names == o.class_names;
  }
};

/// CSV with header `class_name,bias,w0..w{d-1}` and exactly 14 rows.
LinearProbeModel load_probe_model(const std::filesystem::path& path);
void write_probe_model(const std::filesystem::path& path, const LinearProbeModel& model);

struct MaterialLabel {
  std::string class_name;
  double score = 0.0;   // winning pre-softmax score
  double margin = 0.0;  // winning score minus runner-up

  bool operator==(const MaterialLabel&) const = default;
};

/// argmax of weights * embedding + bias; lowest index wins exact ties.
MaterialLabel classify_material(const Eigen::VectorXd& embedding, const LinearProbeModel& model);

SampleSeries<MaterialLabel> classify_materials(const SampleSeries<Embedding>& embeddings,
                                               const LinearProbeModel& model);

/// Temporal mode filter over an odd window; the window is truncated at the
/// ends and a tied mode keeps the centre label.
SampleSeries<MaterialLabel> smooth_materials(const SampleSeries<MaterialLabel>& labels, std::size_t window);

}  // namespace mobiscope
