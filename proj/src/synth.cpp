#include "mobiscope/synth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Geometry>

#include "mobiscope/canonical_json.hpp"

namespace mobiscope {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::normal(double mean, double sd) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

const std::vector<std::string>& synth_stream_order() {
  static const std::vector<std::string> order = {"gps", "slam",      "gaze",      "flow",     "eda",     "ibi",
                                                 "imu_left", "imu_right", "skeleton", "walkway", "material"};
  return order;
}

std::map<std::string, std::uint64_t> derive_stream_seeds(std::uint64_t seed) {
  std::map<std::string, std::uint64_t> out;
  std::uint64_t state = seed;
  for (const auto& name : synth_stream_order()) out[name] = splitmix64(state);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario document

namespace {

std::vector<Eigen::Vector2d> default_block() { return {{0.0, 0.0}, {150.0, 0.0}, {150.0, 100.0}, {0.0, 100.0}}; }

std::vector<WalkwayStretch> default_stretches() {
  return {{0.0, 1.5, "brushed concrete"}, {45.0, 2.5, "asphalt"}, {90.0, 3.0, "granite"},
          {135.0, 2.0, "exposed aggregate concrete"}};
}

template <typename T>
void read(const json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

}  // namespace

SynthScenario SynthScenario::from_json(const json& doc) {
  static const std::set<std::string> known = {
      "session_id",      "seed",           "start_us",          "duration_s",        "origin",
      "stature_m",       "waypoints",      "speed_mps",         "closed_route",      "gps_rate_hz",
      "gps_noise_sigma_m", "gps_h_acc_m",  "gps_dropouts",      "dropout_h_acc_m",   "slam_rate_hz",
      "slam_scale",      "slam_yaw_deg",   "slam_pitch_deg",    "slam_roll_deg",     "slam_translation",
      "drift_fraction",  "drift_heading_deg", "gaze",           "gaze_rate_hz",      "gaze_noise",
      "fix_min_s",       "fix_max_s",      "pan_amplitude",     "pan_period_s",      "raster_rate_hz",
      "raster_size",     "scene_classes",  "eda",               "eda_rate_hz",       "tonic_base_us",
      "tonic_slope_us_per_min", "scr_count", "scr_min_amp_us",  "scr_max_amp_us",    "scr_sigma_s",
      "ibi",             "ibi_mean_ms",    "ibi_sd_ms",         "imu",               "imu_rate_hz",
      "stride_mean_left_s", "stride_mean_right_s", "stride_sd_s", "gyro_amplitude",  "walkway",
      "walkway_rate_hz", "skeleton_px_min", "skeleton_px_max",  "stretches",         "stretch_period_s",
      "material",        "material_rate_hz", "embedding_dim",   "embedding_noise",   "parameters"};
  if (!doc.is_object()) throw Error(Errc::ManifestError, "scenario must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw Error(Errc::ManifestError, "/" + key + ": unknown scenario member");
  }
  SynthScenario s;
  try {
    read(doc, "session_id", s.session_id);
    read(doc, "seed", s.seed);
    read(doc, "start_us", s.start_us);
    read(doc, "duration_s", s.duration_s);
    if (doc.contains("origin")) {
      const auto& o = doc.at("origin");
      s.origin = {o.at("lat_deg").get<double>(), o.at("lon_deg").get<double>(), o.value("h_m", 0.0)};
    }
    read(doc, "stature_m", s.stature_m);
    if (doc.contains("waypoints")) {
      for (const auto& w : doc.at("waypoints")) s.waypoints.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    }
    read(doc, "speed_mps", s.speed_mps);
    read(doc, "closed_route", s.closed_route);
    read(doc, "gps_rate_hz", s.gps_rate_hz);
    read(doc, "gps_noise_sigma_m", s.gps_noise_sigma_m);
    read(doc, "gps_h_acc_m", s.gps_h_acc_m);
    if (doc.contains("gps_dropouts")) {
      for (const auto& d : doc.at("gps_dropouts")) {
        s.gps_dropouts.push_back({d.at("start_s").get<double>(), d.at("duration_s").get<double>()});
      }
    }
    read(doc, "dropout_h_acc_m", s.dropout_h_acc_m);
    read(doc, "slam_rate_hz", s.slam_rate_hz);
    read(doc, "slam_scale", s.slam_scale);
    read(doc, "slam_yaw_deg", s.slam_yaw_deg);
    read(doc, "slam_pitch_deg", s.slam_pitch_deg);
    read(doc, "slam_roll_deg", s.slam_roll_deg);
    if (doc.contains("slam_translation")) {
      const auto& t = doc.at("slam_translation");
      s.slam_translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    }
    read(doc, "drift_fraction", s.drift_fraction);
    read(doc, "drift_heading_deg", s.drift_heading_deg);
    read(doc, "gaze", s.gaze);
    read(doc, "gaze_rate_hz", s.gaze_rate_hz);
    read(doc, "gaze_noise", s.gaze_noise);
    read(doc, "fix_min_s", s.fix_min_s);
    read(doc, "fix_max_s", s.fix_max_s);
    read(doc, "pan_amplitude", s.pan_amplitude);
    read(doc, "pan_period_s", s.pan_period_s);
    read(doc, "raster_rate_hz", s.raster_rate_hz);
    read(doc, "raster_size", s.raster_size);
    read(doc, "scene_classes", s.scene_classes);
    read(doc, "eda", s.eda);
    read(doc, "eda_rate_hz", s.eda_rate_hz);
    read(doc, "tonic_base_us", s.tonic_base_us);
    read(doc, "tonic_slope_us_per_min", s.tonic_slope_us_per_min);
    read(doc, "scr_count", s.scr_count);
    read(doc, "scr_min_amp_us", s.scr_min_amp_us);
    read(doc, "scr_max_amp_us", s.scr_max_amp_us);
    read(doc, "scr_sigma_s", s.scr_sigma_s);
    read(doc, "ibi", s.ibi);
    read(doc, "ibi_mean_ms", s.ibi_mean_ms);
    read(doc, "ibi_sd_ms", s.ibi_sd_ms);
    read(doc, "imu", s.imu);
    read(doc, "imu_rate_hz", s.imu_rate_hz);
    read(doc, "stride_mean_left_s", s.stride_mean_left_s);
    read(doc, "stride_mean_right_s", s.stride_mean_right_s);
    read(doc, "stride_sd_s", s.stride_sd_s);
    read(doc, "gyro_amplitude", s.gyro_amplitude);
    read(doc, "walkway", s.walkway);
    read(doc, "walkway_rate_hz", s.walkway_rate_hz);
    read(doc, "skeleton_px_min", s.skeleton_px_min);
    read(doc, "skeleton_px_max", s.skeleton_px_max);
    if (doc.contains("stretches")) {
      for (const auto& w : doc.at("stretches")) {
        s.stretches.push_back(
            {w.at("start_s").get<double>(), w.at("width_m").get<double>(), w.at("material").get<std::string>()});
      }
    }
    read(doc, "stretch_period_s", s.stretch_period_s);
    read(doc, "material", s.material);
    read(doc, "material_rate_hz", s.material_rate_hz);
    read(doc, "embedding_dim", s.embedding_dim);
    read(doc, "embedding_noise", s.embedding_noise);
    if (doc.contains("parameters")) s.parameters = doc.at("parameters");
  } catch (const json::exception& e) {
    throw Error(Errc::ManifestError, std::string("scenario: ") + e.what());
  }
  if (!(s.duration_s > 0.0) || !(s.speed_mps > 0.0)) throw Error(Errc::ManifestError, "scenario duration and speed must be positive");
  return s;
}

json SynthScenario::to_json() const {
  json wps = json::array();
  for (const auto& w : waypoints) wps.push_back({w.x(), w.y()});
  json drops = json::array();
  for (const auto& d : gps_dropouts) drops.push_back({{"start_s", d.start_s}, {"duration_s", d.duration_s}});
  json str = json::array();
  for (const auto& w : stretches) str.push_back({{"start_s", w.start_s}, {"width_m", w.width_m}, {"material", w.material}});
  return {{"session_id", session_id},
          {"seed", seed},
          {"start_us", start_us},
          {"duration_s", duration_s},
          {"origin", {{"lat_deg", origin.lat_deg}, {"lon_deg", origin.lon_deg}, {"h_m", origin.h_m}}},
          {"stature_m", stature_m},
          {"waypoints", wps},
          {"speed_mps", speed_mps},
          {"closed_route", closed_route},
          {"gps_rate_hz", gps_rate_hz},
          {"gps_noise_sigma_m", gps_noise_sigma_m},
          {"gps_h_acc_m", gps_h_acc_m},
          {"gps_dropouts", drops},
          {"dropout_h_acc_m", dropout_h_acc_m},
          {"slam_rate_hz", slam_rate_hz},
          {"slam_scale", slam_scale},
          {"slam_yaw_deg", slam_yaw_deg},
          {"slam_pitch_deg", slam_pitch_deg},
          {"slam_roll_deg", slam_roll_deg},
          {"slam_translation", {slam_translation.x(), slam_translation.y(), slam_translation.z()}},
          {"drift_fraction", drift_fraction},
          {"drift_heading_deg", drift_heading_deg},
          {"gaze", gaze},
          {"gaze_rate_hz", gaze_rate_hz},
          {"gaze_noise", gaze_noise},
          {"fix_min_s", fix_min_s},
          {"fix_max_s", fix_max_s},
          {"pan_amplitude", pan_amplitude},
          {"pan_period_s", pan_period_s},
          {"raster_rate_hz", raster_rate_hz},
          {"raster_size", raster_size},
          {"scene_classes", scene_classes},
          {"eda", eda},
          {"eda_rate_hz", eda_rate_hz},
          {"tonic_base_us", tonic_base_us},
          {"tonic_slope_us_per_min", tonic_slope_us_per_min},
          {"scr_count", scr_count},
          {"scr_min_amp_us", scr_min_amp_us},
          {"scr_max_amp_us", scr_max_amp_us},
          {"scr_sigma_s", scr_sigma_s},
          {"ibi", ibi},
          {"ibi_mean_ms", ibi_mean_ms},
          {"ibi_sd_ms", ibi_sd_ms},
          {"imu", imu},
          {"imu_rate_hz", imu_rate_hz},
          {"stride_mean_left_s", stride_mean_left_s},
          {"stride_mean_right_s", stride_mean_right_s},
          {"stride_sd_s", stride_sd_s},
          {"gyro_amplitude", gyro_amplitude},
          {"walkway", walkway},
          {"walkway_rate_hz", walkway_rate_hz},
          {"skeleton_px_min", skeleton_px_min},
          {"skeleton_px_max", skeleton_px_max},
          {"stretches", str},
          {"stretch_period_s", stretch_period_s},
          {"material", material},
          {"material_rate_hz", material_rate_hz},
          {"embedding_dim", embedding_dim},
          {"embedding_noise", embedding_noise},
          {"parameters", parameters}};
}

SynthScenario load_scenario(const std::filesystem::path& path) { return SynthScenario::from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Route

RouteModel::RouteModel(std::vector<Eigen::Vector2d> waypoints, double speed_mps, bool closed)
    : points_(std::move(waypoints)), speed_(speed_mps), closed_(closed) {
  if (points_.size() < 2) throw Error(Errc::InvalidRange, "route needs at least two waypoints");
  if (closed_) points_.push_back(points_.front());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) cumulative_.push_back(cumulative_.back() + (points_[i] - points_[i - 1]).norm());
  if (!(length() > 0.0)) throw Error(Errc::InvalidRange, "route has zero length");
}

Eigen::Vector2d RouteModel::at_arc(double arc_m) const {
  double s = arc_m;
  if (closed_) {
    s = std::fmod(s, length());
    if (s < 0.0) s += length();
  } else {
    s = std::clamp(s, 0.0, length());
  }
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = it == cumulative_.end() ? cumulative_.size() - 1 : static_cast<std::size_t>(it - cumulative_.begin());
  if (i == 0) i = 1;
  const double seg = cumulative_[i] - cumulative_[i - 1];
  const double a = seg > 0.0 ? (s - cumulative_[i - 1]) / seg : 0.0;
  return points_[i - 1] + a * (points_[i] - points_[i - 1]);
}

Geodetic surface_point_at(const Eigen::Vector2d& en, const Geodetic& origin) {
  EnuPoint p(en.x(), en.y(), 0.0);
  Geodetic g;
  for (int iter = 0; iter < 8; ++iter) {
    g = enu_to_wgs84(p, origin);
    g.h_m = 0.0;
    const EnuPoint q = wgs84_to_enu(g, origin);
    const Eigen::Vector2d err = q.head<2>() - en;
    if (err.norm() < 1e-10) break;
    // Keep east/north on target and follow the surface height.
    p.head<2>() -= err;
    p.z() = q.z();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Truth document

json GroundTruth::to_json() const {
  json rt = json::array(), re = json::array(), rn = json::array(), ru = json::array();
  for (std::size_t i = 0; i < route_t.size(); ++i) {
    rt.push_back(route_t[i].micros_utc);
    re.push_back(route_enu[i].x());
    rn.push_back(route_enu[i].y());
    ru.push_back(route_enu[i].z());
  }
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(transform.rotation(r, c));
  }
  json fix = json::array();
  for (const auto& f : fixations) {
    fix.push_back({{"t_start", f.t_start.micros_utc}, {"t_end", f.t_end.micros_utc}, {"wx", f.wx}, {"wy", f.wy},
                   {"class_name", f.class_name}});
  }
  json scr = json::array();
  for (std::size_t i = 0; i < scr_peaks.size(); ++i) {
    scr.push_back({{"t_peak", scr_peaks[i].micros_utc}, {"amplitude_us", scr_amplitudes[i]}});
  }
  auto times = [](const std::vector<Timestamp>& v) {
    json a = json::array();
    for (auto t : v) a.push_back(t.micros_utc);
    return a;
  };
  json str = json::array();
  for (const auto& s : stretches) {
    str.push_back({{"t_start", s.t_start.micros_utc}, {"t_end", s.t_end.micros_utc}, {"width_m", s.width_m},
                   {"material", s.material}});
  }
  json drops = json::array();
  for (const auto& d : gps_dropouts) drops.push_back({{"start_s", d.start_s}, {"duration_s", d.duration_s}});
  return {{"format", kTruthFormat},
          {"session_id", session_id},
          {"seed", seed},
          {"origin", {{"lat_deg", origin.lat_deg}, {"lon_deg", origin.lon_deg}, {"h_m", origin.h_m}}},
          {"transform",
           {{"scale", transform.scale},
            {"rotation", rot},
            {"translation", {transform.translation.x(), transform.translation.y(), transform.translation.z()}}}},
          {"drift_fraction", drift_fraction},
          {"route", {{"t", rt}, {"e", re}, {"n", rn}, {"u", ru}}},
          {"gps_dropouts", drops},
          {"fixations", fix},
          {"scr", scr},
          {"heel_strikes", {{"left", times(heel_strikes_left)}, {"right", times(heel_strikes_right)}}},
          {"stretches", str},
          {"sample_periods_s", {{"gaze", gaze_period_s}, {"eda", eda_period_s}, {"imu", imu_period_s}}}};
}

GroundTruth GroundTruth::from_json(const json& doc) {
  if (doc.value("format", std::string()) != kTruthFormat) {
    throw Error(Errc::VersionError, "ground truth format must be " + std::string(kTruthFormat));
  }
  GroundTruth g;
  try {
    g.session_id = doc.at("session_id").get<std::string>();
    g.seed = doc.at("seed").get<std::uint64_t>();
    const auto& o = doc.at("origin");
    g.origin = {o.at("lat_deg").get<double>(), o.at("lon_deg").get<double>(), o.at("h_m").get<double>()};
    const auto& tr = doc.at("transform");
    g.transform.scale = tr.at("scale").get<double>();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) g.transform.rotation(r, c) = tr.at("rotation").at(r * 3 + c).get<double>();
    }
    for (int k = 0; k < 3; ++k) g.transform.translation[k] = tr.at("translation").at(k).get<double>();
    g.drift_fraction = doc.at("drift_fraction").get<double>();
    const auto& route = doc.at("route");
    for (std::size_t i = 0; i < route.at("t").size(); ++i) {
      g.route_t.push_back(Timestamp{route.at("t").at(i).get<std::int64_t>()});
      g.route_enu.emplace_back(route.at("e").at(i).get<double>(), route.at("n").at(i).get<double>(),
                               route.at("u").at(i).get<double>());
    }
    for (const auto& d : doc.at("gps_dropouts")) {
      g.gps_dropouts.push_back({d.at("start_s").get<double>(), d.at("duration_s").get<double>()});
    }
    for (const auto& f : doc.at("fixations")) {
      g.fixations.push_back({Timestamp{f.at("t_start").get<std::int64_t>()}, Timestamp{f.at("t_end").get<std::int64_t>()},
                             f.at("wx").get<double>(), f.at("wy").get<double>(), f.at("class_name").get<std::string>()});
    }
    for (const auto& p : doc.at("scr")) {
      g.scr_peaks.push_back(Timestamp{p.at("t_peak").get<std::int64_t>()});
      g.scr_amplitudes.push_back(p.at("amplitude_us").get<double>());
    }
    for (const auto& t : doc.at("heel_strikes").at("left")) g.heel_strikes_left.push_back(Timestamp{t.get<std::int64_t>()});
    for (const auto& t : doc.at("heel_strikes").at("right")) g.heel_strikes_right.push_back(Timestamp{t.get<std::int64_t>()});
    for (const auto& s : doc.at("stretches")) {
      g.stretches.push_back({Timestamp{s.at("t_start").get<std::int64_t>()}, Timestamp{s.at("t_end").get<std::int64_t>()},
                             s.at("width_m").get<double>(), s.at("material").get<std::string>()});
    }
    const auto& sp = doc.at("sample_periods_s");
    g.gaze_period_s = sp.at("gaze").get<double>();
    g.eda_period_s = sp.at("eda").get<double>();
    g.imu_period_s = sp.at("imu").get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("ground truth: ") + e.what());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Timestamp> grid(Timestamp start, Timestamp end, double rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(Errc::InvalidRange, "sample rate must be positive");
  std::vector<Timestamp> out;
  for (std::int64_t k = 0;; ++k) {
    const Timestamp t = start + Duration{std::llround(static_cast<double>(k) * 1e6 / rate_hz)};
    if (t > end) break;
    if (!out.empty() && t == out.back()) continue;
    out.push_back(t);
  }
  return out;
}

double rel_s(Timestamp t, Timestamp start) { return to_seconds(t - start); }

struct Pan {
  double amplitude;
  double period;
  Eigen::Vector2d at(double tau) const {
    if (amplitude == 0.0) return Eigen::Vector2d::Zero();
    return {amplitude * std::sin(2.0 * std::numbers::pi * tau / period),
            amplitude * std::sin(2.0 * std::numbers::pi * tau / (1.37 * period) + 1.0)};
  }
};

const WalkwayStretch& stretch_at(const std::vector<WalkwayStretch>& stretches, double period, double tau) {
  double s = tau;
  if (period > 0.0) s = std::fmod(tau, period);
  const WalkwayStretch* cur = &stretches.front();
  for (const auto& w : stretches) {
    if (w.start_s <= s) cur = &w;
  }
  return *cur;
}

void generate_gaze(const SynthScenario& sc, Timestamp start, Timestamp end, Rng& rng, Rng& scene_rng, SynthSession& out) {
  const Pan pan{sc.pan_amplitude, sc.pan_period_s};
  const int n = sc.raster_size;
  if (n < 4) throw Error(Errc::InvalidRange, "raster_size must be at least 4");
  const double cell = 1.0 / n;
  if (sc.pan_amplitude + sc.gaze_noise >= 0.5 * cell) {
    throw Error(Errc::InvalidRange, "head pan plus gaze noise must stay below half a raster cell");
  }

  // Rasters: a small pool of random grids, one drawn per keyframe.
  std::map<int, std::string> legend;
  for (std::size_t i = 0; i < sc.scene_classes.size(); ++i) legend[static_cast<int>(i)] = sc.scene_classes[i];
  std::vector<std::vector<int>> pool(16);
  for (auto& g : pool) {
    g.resize(static_cast<std::size_t>(n * n));
    for (auto& c : g) c = static_cast<int>(scene_rng.index(sc.scene_classes.size()));
  }
  const auto raster_times = grid(start, end, sc.raster_rate_hz);
  std::vector<LabelRaster> rasters;
  std::vector<std::size_t> raster_pool;
  for (std::size_t j = 0; j < raster_times.size(); ++j) {
    const std::size_t pick = scene_rng.index(pool.size());
    LabelRaster r;
    r.width = n;
    r.height = n;
    r.classes = pool[pick];
    r.legend = legend;
    r.legend_id = "scene";
    r.grid_path = "grid_" + std::to_string(pick) + ".txt";
    rasters.push_back(std::move(r));
    raster_pool.push_back(pick);
  }
  auto class_at_time = [&](Timestamp mid, int col, int row) -> std::string {
    // Nearest keyframe, earlier on ties.
    std::size_t best = 0;
    Duration best_gap = Duration::max();
    for (std::size_t j = 0; j < raster_times.size(); ++j) {
      const Duration gap = raster_times[j] > mid ? raster_times[j] - mid : mid - raster_times[j];
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
      if (raster_times[j] > mid) break;
    }
    return legend.at(pool[raster_pool[best]][static_cast<std::size_t>(row * n + col)]);
  };

  const auto times = grid(start, end, sc.gaze_rate_hz);
  std::vector<Timestamp> ts;
  std::vector<GazeSample> gz;
  int prev_col = -1, prev_row = -1;
  auto pick_cell = [&](int& col, int& row) {
    do {
      col = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 2)));
      row = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 2)));
    } while (col == prev_col && row == prev_row);
  };
  auto centre = [&](int c) { return (c + 0.5) * cell; };

  std::size_t k = 0;
  int col = 0, row = 0;
  pick_cell(col, row);
  while (true) {
    const auto len = static_cast<std::size_t>(std::llround(rng.uniform(sc.fix_min_s, sc.fix_max_s) * sc.gaze_rate_hz));
    if (k + len + 1 > times.size()) break;
    const Eigen::Vector2d world(centre(col), centre(row));
    for (std::size_t i = 0; i < len; ++i) {
      const Timestamp t = times[k + i];
      const Eigen::Vector2d s = pan.at(rel_s(t, start));
      const double jx = rng.uniform(-sc.gaze_noise, sc.gaze_noise);
      const double jy = rng.uniform(-sc.gaze_noise, sc.gaze_noise);
      ts.push_back(t);
      gz.push_back({world.x() + s.x() + jx, world.y() + s.y() + jy, 0.95});
    }
    TruthFixation f;
    f.t_start = times[k];
    f.t_end = times[k + len - 1];
    f.wx = world.x();
    f.wy = world.y();
    f.class_name = class_at_time(f.t_start + (f.t_end - f.t_start) / 2, col, row);
    out.truth.fixations.push_back(f);
    k += len;

    prev_col = col;
    prev_row = row;
    int ncol = 0, nrow = 0;
    pick_cell(ncol, nrow);
    // One transit sample halfway to the next target.
    const Timestamp t = times[k];
    const Eigen::Vector2d s = pan.at(rel_s(t, start));
    ts.push_back(t);
    gz.push_back({0.5 * (world.x() + centre(ncol)) + s.x(), 0.5 * (world.y() + centre(nrow)) + s.y(), 0.95});
    ++k;
    col = ncol;
    row = nrow;
  }

  // Flow stamped at the gaze times: increments of the pan.
  std::vector<HeadFlow> flow;
  Eigen::Vector2d last = Eigen::Vector2d::Zero();
  for (const auto& t : ts) {
    const Eigen::Vector2d s = pan.at(rel_s(t, start));
    flow.push_back({s.x() - last.x(), s.y() - last.y()});
    last = s;
  }
  out.flow = SampleSeries<HeadFlow>(ts, std::move(flow));
  out.gaze = SampleSeries<GazeSample>(std::move(ts), std::move(gz));
  out.rasters = SampleSeries<LabelRaster>(raster_times, std::move(rasters));
  out.truth.gaze_period_s = 1.0 / sc.gaze_rate_hz;
}

void generate_eda(const SynthScenario& sc, Timestamp start, Timestamp end, Rng& rng, SynthSession& out) {
  const auto times = grid(start, end, sc.eda_rate_hz);
  const double margin = 10.0;
  const double usable = sc.duration_s - 2.0 * margin;
  if (sc.scr_count > 0 && usable / static_cast<double>(sc.scr_count) < 4.0) {
    throw Error(Errc::InvalidRange, "too many SCRs for the session length");
  }
  std::vector<std::size_t> peak_idx;
  std::vector<double> amps;
  for (std::size_t i = 0; i < sc.scr_count; ++i) {
    const double at = margin + (static_cast<double>(i) + rng.uniform(0.3, 0.7)) * usable / static_cast<double>(sc.scr_count);
    peak_idx.push_back(static_cast<std::size_t>(std::llround(at * sc.eda_rate_hz)));
    amps.push_back(rng.uniform(sc.scr_min_amp_us, sc.scr_max_amp_us));
  }
  std::vector<double> v(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double tau = rel_s(times[k], start);
    double x = sc.tonic_base_us + sc.tonic_slope_us_per_min * tau / 60.0;
    for (std::size_t i = 0; i < peak_idx.size(); ++i) {
      const double d = tau - rel_s(times[std::min(peak_idx[i], times.size() - 1)], start);
      if (std::abs(d) < 6.0 * sc.scr_sigma_s) x += amps[i] * std::exp(-d * d / (2.0 * sc.scr_sigma_s * sc.scr_sigma_s));
    }
    v[k] = x;
  }
  for (std::size_t i = 0; i < peak_idx.size(); ++i) {
    out.truth.scr_peaks.push_back(times[std::min(peak_idx[i], times.size() - 1)]);
    out.truth.scr_amplitudes.push_back(amps[i]);
  }
  out.eda = SampleSeries<double>(times, std::move(v));
  out.truth.eda_period_s = 1.0 / sc.eda_rate_hz;
}

void generate_ibi(const SynthScenario& sc, Timestamp start, Timestamp end, Rng& rng, SynthSession& out) {
  std::vector<Timestamp> ts;
  std::vector<double> vs;
  Timestamp t = start + Duration{500'000};
  while (true) {
    const double ibi = std::round(std::clamp(rng.normal(sc.ibi_mean_ms, sc.ibi_sd_ms), 400.0, 1500.0) * 1000.0) / 1000.0;
    t = t + Duration{std::llround(ibi * 1000.0)};
    if (t > end) break;
    ts.push_back(t);
    vs.push_back(ibi);
  }
  out.ibi = SampleSeries<double>(std::move(ts), std::move(vs));
}

std::pair<SampleSeries<ImuSample>, std::vector<Timestamp>> generate_foot(const SynthScenario& sc, Timestamp start,
                                                                           Timestamp end, Timestamp first_hs,
                                                                           double mean_s, Rng& rng) {
  std::vector<Timestamp> hs = {first_hs};
  std::vector<double> strides;
  while (true) {
    const double st = std::clamp(rng.normal(mean_s, sc.stride_sd_s), 0.6 * mean_s, 1.4 * mean_s);
    const Timestamp next = hs.back() + seconds_to_duration(st);
    if (next + seconds_to_duration(0.6 * st) > end) break;
    strides.push_back(st);
    hs.push_back(next);
  }
  if (hs.size() < 2) throw Error(Errc::InvalidRange, "session too short for strides");
  const double last_stride = to_seconds(hs.back() - hs[hs.size() - 2]);
  const Timestamp stop = hs.back() + seconds_to_duration(0.6 * last_stride);
  const auto times = grid(start, stop, sc.imu_rate_hz);
  std::vector<ImuSample> v(times.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Timestamp t = times[k];
    while (j + 1 < hs.size() && hs[j + 1] <= t) ++j;
    double phase = 0.0;
    if (t < hs.front()) {
      phase = 0.5 - to_seconds(hs.front() - t) / to_seconds(hs[1] - hs[0]);
    } else if (j + 1 < hs.size()) {
      phase = static_cast<double>(j) + 0.5 + to_seconds(t - hs[j]) / to_seconds(hs[j + 1] - hs[j]);
    } else {
      phase = static_cast<double>(j) + 0.5 + to_seconds(t - hs[j]) / last_stride;
    }
    v[k].accel = Eigen::Vector3d(0.0, 0.0, 9.81);
    v[k].gyro = Eigen::Vector3d(0.0, sc.gyro_amplitude * std::sin(2.0 * std::numbers::pi * phase), 0.0);
  }
  return {SampleSeries<ImuSample>(times, std::move(v)), std::move(hs)};
}

}  // namespace

SynthSession synthesize(const SynthScenario& sc) {
  SynthSession out;
  const auto seeds = derive_stream_seeds(sc.seed);
  Rng gps_rng(seeds.at("gps"));
  Rng gaze_rng(seeds.at("gaze"));
  Rng flow_rng(seeds.at("flow"));
  Rng eda_rng(seeds.at("eda"));
  Rng ibi_rng(seeds.at("ibi"));
  Rng left_rng(seeds.at("imu_left"));
  Rng right_rng(seeds.at("imu_right"));
  Rng skeleton_rng(seeds.at("skeleton"));
  Rng material_rng(seeds.at("material"));

  const Timestamp start{sc.start_us};
  const Timestamp end = start + seconds_to_duration(sc.duration_s);
  const RouteModel route(sc.waypoints.empty() ? default_block() : sc.waypoints, sc.speed_mps, sc.closed_route);
  auto truth_at = [&](Timestamp t) {
    const Eigen::Vector2d p = route.at_time(rel_s(t, start));
    return Eigen::Vector3d(p.x(), p.y(), 0.0);
  };

  GroundTruth& truth = out.truth;
  truth.session_id = sc.session_id;
  truth.seed = sc.seed;
  truth.origin = sc.origin;
  truth.drift_fraction = sc.drift_fraction;
  truth.gps_dropouts = sc.gps_dropouts;
  truth.transform.scale = sc.slam_scale;
  truth.transform.rotation = (Eigen::AngleAxisd(sc.slam_yaw_deg * kDeg, Eigen::Vector3d::UnitZ()) *
                              Eigen::AngleAxisd(sc.slam_pitch_deg * kDeg, Eigen::Vector3d::UnitY()) *
                              Eigen::AngleAxisd(sc.slam_roll_deg * kDeg, Eigen::Vector3d::UnitX()))
                                 .toRotationMatrix();
  truth.transform.translation = sc.slam_translation;
  const SimilarityTransform to_slam = truth.transform.inverse();

  // SLAM: the route pushed through the inverse transform, with optional drift
  // accumulated in ENU along a fixed heading.
  {
    const auto times = grid(start, end, sc.slam_rate_hz);
    const Eigen::Vector3d drift_dir(std::cos(sc.drift_heading_deg * kDeg), std::sin(sc.drift_heading_deg * kDeg), 0.0);
    Eigen::Quaterniond q(to_slam.rotation);
    q.normalize();
    std::vector<SlamPose> poses;
    for (const auto& t : times) {
      const Eigen::Vector3d p = truth_at(t);
      truth.route_t.push_back(t);
      truth.route_enu.push_back(p);
      const double arc = sc.speed_mps * rel_s(t, start);
      poses.push_back({to_slam.apply(p + sc.drift_fraction * arc * drift_dir), q});
    }
    out.slam = SampleSeries<SlamPose>(times, std::move(poses));
  }

  // GPS: surface fixes, degraded during dropouts.
  {
    const auto times = grid(start, end, sc.gps_rate_hz);
    std::vector<GpsFix> fixes;
    for (const auto& t : times) {
      const double tau = rel_s(t, start);
      const bool dropped = std::any_of(sc.gps_dropouts.begin(), sc.gps_dropouts.end(), [&](const Interval& d) {
        return tau >= d.start_s && tau < d.start_s + d.duration_s;
      });
      const double sigma = dropped ? sc.dropout_h_acc_m : sc.gps_noise_sigma_m;
      Eigen::Vector2d en = truth_at(t).head<2>();
      const double ne = gps_rng.normal(0.0, 1.0);
      const double nn = gps_rng.normal(0.0, 1.0);
      if (sigma > 0.0) en += Eigen::Vector2d(sigma * ne, sigma * nn);
      const Geodetic g = surface_point_at(en, sc.origin);
      fixes.push_back({g.lat_deg, g.lon_deg, dropped ? sc.dropout_h_acc_m : sc.gps_h_acc_m});
    }
    out.gps = SampleSeries<GpsFix>(times, std::move(fixes));
  }

  if (sc.gaze) generate_gaze(sc, start, end, gaze_rng, flow_rng, out);
  if (sc.eda) generate_eda(sc, start, end, eda_rng, out);
  if (sc.ibi) generate_ibi(sc, start, end, ibi_rng, out);
  if (sc.imu) {
    const Timestamp first_left = start + seconds_to_duration(left_rng.uniform(0.5, 1.0));
    auto [left, hs_left] = generate_foot(sc, start, end, first_left, sc.stride_mean_left_s, left_rng);
    auto [right, hs_right] =
        generate_foot(sc, start, end, first_left + seconds_to_duration(0.5 * sc.stride_mean_right_s),
                      sc.stride_mean_right_s, right_rng);
    out.imu_left = std::move(left);
    out.imu_right = std::move(right);
    truth.heel_strikes_left = std::move(hs_left);
    truth.heel_strikes_right = std::move(hs_right);
    truth.imu_period_s = 1.0 / sc.imu_rate_hz;
  }

  const auto stretches = sc.stretches.empty() ? default_stretches() : sc.stretches;
  const double period = sc.stretches.empty() ? 180.0 : sc.stretch_period_s;
  {
    // Truth timeline of walkway stretches over the session.
    std::vector<std::pair<double, const WalkwayStretch*>> starts;
    if (period > 0.0) {
      for (double base = 0.0; base < sc.duration_s; base += period) {
        for (const auto& w : stretches) {
          if (base + w.start_s < sc.duration_s) starts.emplace_back(base + w.start_s, &w);
        }
      }
    } else {
      for (const auto& w : stretches) {
        if (w.start_s < sc.duration_s) starts.emplace_back(w.start_s, &w);
      }
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const double stop = i + 1 < starts.size() ? starts[i + 1].first : sc.duration_s;
      truth.stretches.push_back({start + seconds_to_duration(starts[i].first), start + seconds_to_duration(stop),
                                 starts[i].second->width_m, starts[i].second->material});
    }
  }

  if (sc.walkway) {
    const auto times = grid(start, end, sc.walkway_rate_hz);
    std::vector<SkeletonFrame> frames;
    std::vector<WalkwayEdges> edges;
    for (const auto& t : times) {
      const double px = skeleton_rng.uniform(sc.skeleton_px_min, sc.skeleton_px_max);
      const double head_y = 100.0;
      SkeletonFrame f;
      f.joints["nose"] = {640.0, head_y, 0.9};
      f.joints["l_ankle"] = {620.0, head_y + px, 0.9};
      f.joints["r_ankle"] = {660.0, head_y + px, 0.9};
      frames.push_back(std::move(f));
      const double mpp = sc.stature_m * 0.93 / px;
      const double width_px = stretch_at(stretches, period, rel_s(t, start)).width_m / mpp;
      edges.push_back({640.0 - 0.5 * width_px, 640.0 + 0.5 * width_px, head_y + px});
    }
    out.skeleton = SampleSeries<SkeletonFrame>(times, std::move(frames));
    out.edges = SampleSeries<WalkwayEdges>(times, std::move(edges));
  }

  if (sc.material) {
    const auto& names = default_material_classes();
    const auto d = static_cast<Eigen::Index>(sc.embedding_dim);
    LinearProbeModel probe;
    probe.class_names.assign(names.begin(), names.end());
    probe.weights.resize(static_cast<Eigen::Index>(kMaterialClasses), d);
    probe.bias.resize(static_cast<Eigen::Index>(kMaterialClasses));
    for (Eigen::Index r = 0; r < probe.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < d; ++c) probe.weights(r, c) = material_rng.normal();
      probe.weights.row(r) *= 3.0 / probe.weights.row(r).norm();
      probe.bias[r] = -0.5 * probe.weights.row(r).squaredNorm();
    }
    const auto times = grid(start, end, sc.material_rate_hz);
    std::vector<Embedding> emb;
    for (const auto& t : times) {
      const std::string& m = stretch_at(stretches, period, rel_s(t, start)).material;
      const auto it = std::find(names.begin(), names.end(), m);
      if (it == names.end()) throw Error(Errc::InvalidRange, "material '" + m + "' is not a probe class");
      Embedding e = probe.weights.row(it - names.begin()).transpose();
      for (Eigen::Index c = 0; c < d; ++c) e[c] += material_rng.normal(0.0, sc.embedding_noise);
      emb.push_back(std::move(e));
    }
    out.embeddings = SampleSeries<Embedding>(times, std::move(emb));
    out.probe = std::move(probe);
  }

  // Manifest document.
  json streams = json::array();
  auto add = [&](StreamKind kind, const std::string& path, double rate) {
    streams.push_back({{"kind", std::string(to_string(kind))}, {"path", path}, {"clock_offset_us", 0}, {"nominal_rate_hz", rate}});
  };
  add(StreamKind::gps, "gps.csv", sc.gps_rate_hz);
  add(StreamKind::slam_pose, "slam_pose.csv", sc.slam_rate_hz);
  if (out.gaze) {
    add(StreamKind::gaze, "gaze.csv", sc.gaze_rate_hz);
    add(StreamKind::head_flow, "head_flow.csv", sc.gaze_rate_hz);
    add(StreamKind::label_raster, "rasters/index.csv", sc.raster_rate_hz);
  }
  if (out.eda) add(StreamKind::eda, "eda.csv", sc.eda_rate_hz);
  if (out.ibi) {
    streams.push_back({{"kind", "ibi"}, {"path", "ibi.csv"}, {"clock_offset_us", 0}});
  }
  if (out.imu_left) {
    add(StreamKind::imu_foot_left, "imu_foot_left.csv", sc.imu_rate_hz);
    add(StreamKind::imu_foot_right, "imu_foot_right.csv", sc.imu_rate_hz);
  }
  if (out.skeleton) {
    add(StreamKind::skeleton, "skeleton.csv", sc.walkway_rate_hz);
    add(StreamKind::walkway_edges, "walkway_edges.csv", sc.walkway_rate_hz);
  }
  if (out.embeddings) add(StreamKind::material_embedding, "material_embedding.csv", sc.material_rate_hz);
  json params = sc.parameters.is_object() ? sc.parameters : json::object();
  if (out.probe && !params.contains("walkway.probe_model")) params["walkway.probe_model"] = "probe.csv";
  out.manifest = {{"session_id", sc.session_id},
                  {"participant", {{"id", "P01"}, {"stature_m", sc.stature_m}, {"cohort_tag", "synthetic"}}},
                  {"streams", std::move(streams)},
                  {"parameters", std::move(params)}};
  return out;
}

void write_session(const SynthSession& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_gps(dir / "gps.csv", s.gps);
  write_slam_poses(dir / "slam_pose.csv", s.slam);
  if (s.gaze) {
    write_gaze(dir / "gaze.csv", *s.gaze);
    write_head_flow(dir / "head_flow.csv", *s.flow);
    std::filesystem::create_directories(dir / "rasters", ec);
    write_label_rasters(dir / "rasters" / "index.csv", *s.rasters);
  }
  if (s.eda) write_eda(dir / "eda.csv", *s.eda);
  if (s.ibi) write_ibi(dir / "ibi.csv", *s.ibi);
  if (s.imu_left) write_imu(dir / "imu_foot_left.csv", *s.imu_left);
  if (s.imu_right) write_imu(dir / "imu_foot_right.csv", *s.imu_right);
  if (s.skeleton) write_skeleton(dir / "skeleton.csv", *s.skeleton);
  if (s.edges) write_walkway_edges(dir / "walkway_edges.csv", *s.edges);
  if (s.embeddings) write_material_embeddings(dir / "material_embedding.csv", *s.embeddings);
  if (s.probe) write_probe_model(dir / "probe.csv", *s.probe);
  write_json_file(dir / "session.json", s.manifest);
  write_json_file(dir / "ground_truth.json", s.truth.to_json());
}

SessionManifest generate_session(const SynthScenario& scenario, const std::filesystem::path& out_dir) {
  write_session(synthesize(scenario), out_dir);
  return parse_manifest(out_dir / "session.json");
}

}  // namespace mobiscope
