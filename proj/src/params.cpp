#include "mobiscope/params.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "mobiscope/error.hpp"

namespace mobiscope {

namespace {

std::string type_name(const ParamValue& v) {
  if (std::holds_alternative<double>(v)) return "number";
  if (std::holds_alternative<bool>(v)) return "boolean";
  return "string";
}

}  // namespace

const std::map<std::string, ParamValue, std::less<>>& Parameters::defaults() {
  static const std::map<std::string, ParamValue, std::less<>> table = {
      // geo_fusion
      {"geo.max_h_acc_m", 10.0},
      {"geo.max_speed_mps", 3.0},
      {"geo.pair_tol_ms", 200.0},
      {"geo.min_anchor_diag_m", 20.0},
      {"geo.use_altitude", false},
      {"geo.piecewise", false},
      {"geo.piecewise_window_anchors", 60.0},
      // gaze
      {"gaze.min_fix_duration_ms", 100.0},
      {"gaze.theta_base", 0.03},
      {"gaze.k_noise", 3.0},
      {"gaze.noise_window_ms", 1000.0},
      {"gaze.min_confidence", 0.6},
      {"gaze.raster_tol_ms", 500.0},
      // physio
      {"physio.eda_rate_hz", 4.0},
      {"physio.tonic_window_s", 8.0},
      {"physio.scr_min_amplitude_us", 0.05},
      {"physio.scr_refractory_s", 1.0},
      {"physio.window_s", 60.0},
      {"physio.step_s", 5.0},
      {"physio.min_beats", 20.0},
      {"physio.ibi_min_ms", 300.0},
      {"physio.ibi_max_ms", 2000.0},
      // gait
      {"gait.axis", std::string("gy")},
      {"gait.omega_min", 1.0},
      {"gait.min_stride_gap_s", 0.4},
      {"gait.min_rate_hz", 50.0},
      {"gait.max_stride_time_s", 2.5},
      {"gait.window_s", 60.0},
      {"gait.step_s", 5.0},
      // walkway
      {"walkway.stature_fraction", 0.93},
      {"walkway.min_kp_conf", 0.3},
      {"walkway.min_skeleton_px", 50.0},
      {"walkway.max_scale_age_s", 2.0},
      {"walkway.smooth_window", 5.0},
      {"walkway.head_joint", std::string("nose")},
      {"walkway.left_ankle_joint", std::string("l_ankle")},
      {"walkway.right_ankle_joint", std::string("r_ankle")},
      {"walkway.probe_model", std::string("")},
      // fusion
      {"fusion.segment_mode", std::string("distance")},
      {"fusion.segment_length", 10.0},
      {"fusion.min_fill", 0.5},
      {"fusion.min_coverage", 0.5},
      {"fusion.z_thresh", 2.0},
      {"fusion.hotspot_metrics", std::string("scr_rate_per_min,mean_disp_h,mean_disp_v,rmssd_ms,stv_s")},
  };
  return table;
}

Parameters::Parameters() : values_(defaults().begin(), defaults().end()) {}

bool Parameters::is_known(std::string_view key) { return defaults().find(key) != defaults().end(); }

const ParamValue& Parameters::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::ManifestError, "unknown parameter '" + std::string(key) + "'");
  return it->second;
}

double Parameters::number(std::string_view key) const {
  const auto& v = get(key);
  if (!std::holds_alternative<double>(v)) throw Error(Errc::ManifestError, std::string(key) + " is not a number");
  return std::get<double>(v);
}

bool Parameters::flag(std::string_view key) const {
  const auto& v = get(key);
  if (!std::holds_alternative<bool>(v)) throw Error(Errc::ManifestError, std::string(key) + " is not a boolean");
  return std::get<bool>(v);
}

const std::string& Parameters::text(std::string_view key) const {
  const auto& v = get(key);
  if (!std::holds_alternative<std::string>(v)) throw Error(Errc::ManifestError, std::string(key) + " is not a string");
  return std::get<std::string>(v);
}

void Parameters::set(const std::string& key, const nlohmann::json& value, const std::string& where) {
  const std::string at = where.empty() ? key : where;
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::ManifestError, "unknown parameter key at " + at);
  ParamValue& slot = it->second;
  if (std::holds_alternative<double>(slot) && value.is_number()) {
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw Error(Errc::ManifestError, "non-finite number at " + at);
    slot = v;
  } else if (std::holds_alternative<bool>(slot) && value.is_boolean()) {
    slot = value.get<bool>();
  } else if (std::holds_alternative<std::string>(slot) && value.is_string()) {
    slot = value.get<std::string>();
  } else {
    throw Error(Errc::ManifestError, "expected " + type_name(slot) + " at " + at);
  }
}

void Parameters::set_from_string(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::ManifestError, "unknown parameter key '" + key + "'");
  if (std::holds_alternative<double>(it->second)) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || errno != 0 || !std::isfinite(v)) {
      throw Error(Errc::ManifestError, "expected number for '" + key + "', got '" + value + "'");
    }
    it->second = v;
  } else if (std::holds_alternative<bool>(it->second)) {
    if (value == "true") it->second = true;
    else if (value == "false") it->second = false;
    else throw Error(Errc::ManifestError, "expected true/false for '" + key + "'");
  } else {
    it->second = value;
  }
}

void Parameters::merge(const nlohmann::json& overrides, const std::string& where) {
  if (!overrides.is_object()) throw Error(Errc::ManifestError, "expected object at " + where);
  for (const auto& [k, v] : overrides.items()) {
    set(k, v, where + "/" + k);
  }
}

nlohmann::json Parameters::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : values_) {
    std::visit([&](const auto& x) { out[k] = x; }, v);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    if (b != std::string::npos) {
      const auto e = cur.find_last_not_of(" \t");
      out.push_back(cur.substr(b, e - b + 1));
    }
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

}  // namespace mobiscope
