#include "mobiscope/walkway.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mobiscope/csv.hpp"

namespace mobiscope {

const std::array<std::string, kMaterialClasses>& default_material_classes() {
  static const std::array<std::string, kMaterialClasses> names = {
      "concrete",  "asphalt",   "tiles",     "bricks",    "brushed concrete", "granite",   "exposed aggregate concrete",
      "surface_8", "surface_9", "surface_10", "surface_11", "surface_12",      "surface_13", "surface_14"};
  return names;
}

PixelScale pixel_scale(const SkeletonFrame& frame, Timestamp t, double stature_m, const WalkwayParams& params) {
  auto joint = [&](const std::string& name) -> const Keypoint& {
    auto it = frame.joints.find(name);
    if (it == frame.joints.end() || it->second.confidence < params.min_kp_conf) {
      throw Error(Errc::SkeletonIncomplete, "joint '" + name + "' missing or below confidence");
    }
    return it->second;
  };
  const Keypoint& head = joint(params.head_joint);
  const Keypoint& la = joint(params.left_ankle_joint);
  const Keypoint& ra = joint(params.right_ankle_joint);
  const double px = std::abs(0.5 * (la.py + ra.py) - head.py);
  if (px < params.min_skeleton_px) {
    throw Error(Errc::TooSmall, "skeleton spans " + csv::format_double(px) + " px");
  }
  return {stature_m * params.stature_fraction / px, t, px};
}

WidthEstimate estimate_width(const WalkwayEdges& edges, Timestamp t, const PixelScale& scale,
                             const WalkwayParams& params) {
  if (!(edges.right_px > edges.left_px)) throw Error(Errc::EdgeOrderError, "right edge not right of left edge");
  const Duration age = t > scale.t ? t - scale.t : scale.t - t;
  if (age > params.max_scale_age) throw Error(Errc::StaleScale, "scale is " + std::to_string(age.count()) + " us away");
  const double px = edges.right_px - edges.left_px;
  return {t, px * scale.meters_per_pixel, px};
}

WidthSeriesResult estimate_widths(const SampleSeries<SkeletonFrame>& skeleton, const SampleSeries<WalkwayEdges>& edges,
                                  double stature_m, const WalkwayParams& params) {
  WidthSeriesResult out;
  std::vector<PixelScale> scales;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    try {
      scales.push_back(pixel_scale(skeleton.value(i), skeleton.time(i), stature_m, params));
    } catch (const Error&) {
      ++out.skipped_frames;
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Timestamp t = edges.time(i);
    auto it = std::lower_bound(scales.begin(), scales.end(), t,
                               [](const PixelScale& s, Timestamp v) { return s.t < v; });
    const PixelScale* best = nullptr;
    if (it != scales.begin()) best = &*std::prev(it);
    if (it != scales.end() && (best == nullptr || it->t - t < t - best->t)) best = &*it;
    if (best == nullptr) {
      ++out.unscaled_edges;
      continue;
    }
    try {
      out.widths.push_back(estimate_width(edges.value(i), t, *best, params));
    } catch (const Error& e) {
      if (e.code() == Errc::StaleScale) {
        ++out.unscaled_edges;
      } else {
        ++out.rejected_edges;
      }
    }
  }
  return out;
}

LinearProbeModel load_probe_model(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto& header = reader.header();
  if (header.size() < 3 || header[0] != "class_name" || header[1] != "bias") {
    throw Error(Errc::ParseError, path.string() + ": probe header must be class_name,bias,w0..");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k + 2] != "w" + std::to_string(k)) {
      throw Error(Errc::ParseError, path.string() + ": probe column " + std::to_string(k + 2) + " must be w" +
                                        std::to_string(k));
    }
  }
  std::vector<std::string> names;
  std::vector<double> bias;
  std::vector<double> w;
  while (reader.next()) {
    reader.expect_width(d + 2);
    names.emplace_back(reader.fields()[0]);
    bias.push_back(reader.double_at(1));
    for (std::size_t k = 0; k < d; ++k) w.push_back(reader.double_at(k + 2));
  }
  if (names.size() != kMaterialClasses) {
    throw Error(Errc::ParseError, path.string() + ": probe has " + std::to_string(names.size()) + " classes, expected " +
                                      std::to_string(kMaterialClasses));
  }
  LinearProbeModel m;
  m.class_names = std::move(names);
  m.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  m.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      w.data(), static_cast<Eigen::Index>(kMaterialClasses), static_cast<Eigen::Index>(d));
  return m;
}

void write_probe_model(const std::filesystem::path& path, const LinearProbeModel& model) {
  std::vector<std::string> header = {"class_name", "bias"};
  for (Eigen::Index k = 0; k < model.embedding_dim(); ++k) header.push_back("w" + std::to_string(k));
  csv::Writer out(path, header);
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    out.field(model.class_names[static_cast<std::size_t>(r)]).field(model.bias[r]);
    for (Eigen::Index k = 0; k < model.embedding_dim(); ++k) out.field(model.weights(r, k));
    out.end_row();
  }
}

MaterialLabel classify_material(const Eigen::VectorXd& embedding, const LinearProbeModel& model) {
  if (embedding.size() != model.embedding_dim()) {
    throw Error(Errc::DimError, "embedding has " + std::to_string(embedding.size()) + " dims, probe expects " +
                                    std::to_string(model.embedding_dim()));
  }
  const Eigen::VectorXd scores = model.weights * embedding + model.bias;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, scores[i]);
  }
  return {model.class_names[static_cast<std::size_t>(best)], scores[best], scores[best] - runner_up};
}

SampleSeries<MaterialLabel> classify_materials(const SampleSeries<Embedding>& embeddings,
                                               const LinearProbeModel& model) {
  std::vector<MaterialLabel> labels;
  labels.reserve(embeddings.size());
  for (const auto& e : embeddings.values()) labels.push_back(classify_material(e, model));
  return SampleSeries<MaterialLabel>({embeddings.times().begin(), embeddings.times().end()}, std::move(labels));
}

SampleSeries<MaterialLabel> smooth_materials(const SampleSeries<MaterialLabel>& labels, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw Error(Errc::InvalidRange, "mode window must be odd and positive");
  const std::size_t n = labels.size();
  const std::size_t half = window / 2;
  std::vector<MaterialLabel> out(labels.values().begin(), labels.values().end());
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string_view, std::size_t> counts;
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    for (std::size_t k = lo; k <= hi; ++k) ++counts[labels.value(k).class_name];
    const std::string& centre = labels.value(i).class_name;
    std::size_t best_count = counts[centre];
    std::string_view best = centre;
    for (const auto& [name, c] : counts) {
      if (c > best_count) {
        best_count = c;
        best = name;
      }
    }
    if (best != centre) {
      // Borrow score/margin from the nearest frame carrying the winning label.
      for (std::size_t off = 1; off <= half; ++off) {
        if (i >= off && labels.value(i - off).class_name == best) {
          out[i] = labels.value(i - off);
          break;
        }
        if (i + off < n && labels.value(i + off).class_name == best) {
          out[i] = labels.value(i + off);
          break;
        }
      }
    }
  }
  return SampleSeries<MaterialLabel>({labels.times().begin(), labels.times().end()}, std::move(out));
}

}  // namespace mobiscope
