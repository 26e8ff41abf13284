#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobiscope/bundle.hpp"
#include "mobiscope/synth.hpp"

namespace mobiscope {

/// Precision is absent when the detector reported nothing; recall is absent
/// when the truth has no events of that kind.
struct DetectionScore {
  std::size_t n_truth = 0;
  std::size_t n_detected = 0;
  std::size_t n_matched = 0;
  std::optional<double> precision;
  std::optional<double> recall;

  nlohmann::json to_json() const;
};

struct TruthScore {
  std::string session_id;
  DetectionScore fixations;
  DetectionScore scr;
  DetectionScore strides;
  std::optional<double> target_class_agreement;  // over matched fixations
  double scale_rel_error = 0.0;
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
  double trajectory_rmse_m = 0.0;
  double trajectory_max_error_m = 0.0;
  std::optional<double> material_accuracy;
  std::optional<double> width_mae_m;

  /// True when every detector with truth events has precision and recall 1.
  bool all_detectors_perfect() const;
  nlohmann::json to_json() const;
};

/// Greedy one-to-one matching of detected to true event times in time order;
/// a pair matches when the times differ by at most `tolerance`.
DetectionScore score_events(const std::vector<Timestamp>& truth, const std::vector<Timestamp>& detected,
                            Duration tolerance);

/// Fixations match when both boundaries lie within one gaze sample period.
/// Events match within one sample period of their stream. Trajectory errors
/// compare the fused points with the true route at shared timestamps.
TruthScore score_against_truth(const SessionBundle& bundle, const GroundTruth& truth);

}  // namespace mobiscope
