#include "mobiscope/bundle.hpp"

#include "mobiscope/canonical_json.hpp"

namespace mobiscope {

using nlohmann::json;

namespace {

std::int64_t us(Timestamp t) { return t.micros_utc; }
Timestamp ts(const json& j) { return Timestamp{j.get<std::int64_t>()}; }

json geo_json(const Geodetic& g) { return {{"lat_deg", g.lat_deg}, {"lon_deg", g.lon_deg}, {"h_m", g.h_m}}; }
Geodetic geo_from(const json& j) {
  return {j.at("lat_deg").get<double>(), j.at("lon_deg").get<double>(), j.at("h_m").get<double>()};
}

json transform_json(const SimilarityTransform& s) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(s.rotation(r, c));
  }
  return {{"scale", s.scale},
          {"rotation", std::move(rot)},
          {"translation", {s.translation.x(), s.translation.y(), s.translation.z()}}};
}
SimilarityTransform transform_from(const json& j) {
  SimilarityTransform s;
  s.scale = j.at("scale").get<double>();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s.rotation(r, c) = j.at("rotation").at(r * 3 + c).get<double>();
  }
  for (int k = 0; k < 3; ++k) s.translation[k] = j.at("translation").at(k).get<double>();
  return s;
}

json fixation_json(const Fixation& f) {
  return {{"t_start", us(f.t_start)}, {"t_end", us(f.t_end)}, {"cx", f.cx},       {"cy", f.cy},
          {"disp_h", f.disp_h},       {"disp_v", f.disp_v},   {"n_samples", f.n_samples}, {"theta", f.theta}};
}
Fixation fixation_from(const json& j) {
  Fixation f;
  f.t_start = ts(j.at("t_start"));
  f.t_end = ts(j.at("t_end"));
  f.cx = j.at("cx").get<double>();
  f.cy = j.at("cy").get<double>();
  f.disp_h = j.at("disp_h").get<double>();
  f.disp_v = j.at("disp_v").get<double>();
  f.n_samples = j.at("n_samples").get<std::size_t>();
  f.theta = j.at("theta").get<double>();
  return f;
}

json strides_json(const std::vector<StrideEvent>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back({{"t_heel_strike", us(e.t_heel_strike)}, {"t_midswing_peak", us(e.t_midswing_peak)}});
  return out;
}
std::vector<StrideEvent> strides_from(const json& j, Foot foot) {
  std::vector<StrideEvent> out;
  for (const auto& e : j) out.push_back({ts(e.at("t_heel_strike")), foot, ts(e.at("t_midswing_peak"))});
  return out;
}

json span_json(const TimeRange& r) { return {{"start", us(r.start)}, {"end", us(r.end)}}; }
TimeRange span_from(const json& j) { return {ts(j.at("start")), ts(j.at("end"))}; }

json attention_json(const AttentionMetrics& a) {
  return {{"fixation_rate_per_min", a.fixation_rate_per_min},
          {"mean_duration_ms", a.mean_duration_ms},
          {"mean_disp_h", a.mean_disp_h},
          {"mean_disp_v", a.mean_disp_v},
          {"dwell_by_class", a.dwell_by_class}};
}
AttentionMetrics attention_from(const json& j) {
  AttentionMetrics a;
  a.fixation_rate_per_min = j.at("fixation_rate_per_min").get<double>();
  a.mean_duration_ms = j.at("mean_duration_ms").get<double>();
  a.mean_disp_h = j.at("mean_disp_h").get<double>();
  a.mean_disp_v = j.at("mean_disp_v").get<double>();
  a.dwell_by_class = j.at("dwell_by_class").get<std::map<std::string, double>>();
  return a;
}

json gait_json(const GaitMetrics& g) {
  return {{"step_count", g.step_count},
          {"mean_stride_time_s", g.mean_stride_time_s},
          {"stv_s", g.stv_s},
          {"stv_cv", g.stv_cv},
          {"asymmetry", g.asymmetry ? json(*g.asymmetry) : json(nullptr)},
          {"excluded_pauses", g.excluded_pauses}};
}
GaitMetrics gait_from(const json& j) {
  GaitMetrics g;
  g.step_count = j.at("step_count").get<std::size_t>();
  g.mean_stride_time_s = j.at("mean_stride_time_s").get<double>();
  g.stv_s = j.at("stv_s").get<double>();
  g.stv_cv = j.at("stv_cv").get<double>();
  if (!j.at("asymmetry").is_null()) g.asymmetry = j.at("asymmetry").get<double>();
  g.excluded_pauses = j.at("excluded_pauses").get<std::size_t>();
  return g;
}

json index_json(const SessionBundle& b) {
  json knots = nullptr;
  if (b.piecewise) {
    knots = json::array();
    for (const auto& k : b.piecewise->knots) {
      knots.push_back({{"center", us(k.center)}, {"n_anchors", k.n_anchors}, {"transform", transform_json(k.transform)}});
    }
  }
  return {
      {"format", kBundleFormat},
      {"session_id", b.session_id},
      {"manifest", b.manifest},
      {"parameters", b.parameters},
      {"segment_spec", b.segment_spec},
      {"warnings", b.warnings},
      {"alignment",
       {{"origin", geo_json(b.origin)},
        {"transform", transform_json(b.transform)},
        {"piecewise_knots", std::move(knots)},
        {"piecewise_skipped_windows", b.piecewise ? b.piecewise->skipped_windows : 0},
        {"anchor_residual_rms_m", b.anchor_residual_rms_m},
        {"n_anchors", b.n_anchors},
        {"n_rejected_fixes", b.n_rejected_fixes}}},
      {"summary",
       {{"attention", b.attention ? attention_json(*b.attention) : json(nullptr)},
        {"gait", b.gait ? gait_json(*b.gait) : json(nullptr)}}},
      {"hotspots",
       {{"metrics", b.hotspots.metrics},
        {"z_thresh", b.hotspots.z_thresh},
        {"min_coverage", b.hotspots.min_coverage},
        {"insufficient", b.hotspots.insufficient}}},
      {"documents",
       {{"trajectory", "trajectory.json"},
        {"events", "events.json"},
        {"windows", "windows.json"},
        {"segments", "segments.geojson"}}},
  };
}

json trajectory_json(const FusedTrajectory& traj) {
  json t = json::array(), e = json::array(), n = json::array(), u = json::array();
  json lat = json::array(), lon = json::array(), h = json::array(), arc = json::array();
  for (const auto& p : traj.points) {
    t.push_back(us(p.t));
    e.push_back(p.enu.x());
    n.push_back(p.enu.y());
    u.push_back(p.enu.z());
    lat.push_back(p.geo.lat_deg);
    lon.push_back(p.geo.lon_deg);
    h.push_back(p.geo.h_m);
    arc.push_back(p.arc_m);
  }
  return {{"format", kBundleFormat}, {"origin", geo_json(traj.origin)},
          {"t", std::move(t)},       {"e", std::move(e)},
          {"n", std::move(n)},       {"u", std::move(u)},
          {"lat", std::move(lat)},   {"lon", std::move(lon)},
          {"h", std::move(h)},       {"arc_m", std::move(arc)}};
}

FusedTrajectory trajectory_from(const json& j) {
  FusedTrajectory traj;
  traj.origin = geo_from(j.at("origin"));
  const auto& t = j.at("t");
  for (std::size_t i = 0; i < t.size(); ++i) {
    TrajectoryPoint p;
    p.t = ts(t.at(i));
    p.enu = {j.at("e").at(i).get<double>(), j.at("n").at(i).get<double>(), j.at("u").at(i).get<double>()};
    p.geo = {j.at("lat").at(i).get<double>(), j.at("lon").at(i).get<double>(), j.at("h").at(i).get<double>()};
    p.arc_m = j.at("arc_m").at(i).get<double>();
    traj.points.push_back(p);
  }
  return traj;
}

json events_json(const SessionBundle& b) {
  json fix = json::array();
  for (const auto& f : b.fixations) fix.push_back(fixation_json(f));
  json targets = json::array();
  for (const auto& r : b.targets) {
    targets.push_back({{"fixation", fixation_json(r.fixation)}, {"class_name", r.class_name}, {"raster_t", us(r.raster_t)}});
  }
  json scr = json::array();
  for (const auto& p : b.scr) {
    scr.push_back({{"t_peak", us(p.t_peak)}, {"amplitude_us", p.amplitude_us}, {"rise_time_ms", p.rise_time_ms}});
  }
  json widths = json::array();
  for (const auto& w : b.widths) widths.push_back({{"t", us(w.t)}, {"width_m", w.width_m}, {"width_px", w.width_px}});
  json materials = json::array();
  for (const auto& [t, m] : b.materials) {
    materials.push_back({{"t", us(t)}, {"class_name", m.class_name}, {"score", m.score}, {"margin", m.margin}});
  }
  return {{"format", kBundleFormat},
          {"fixations", std::move(fix)},
          {"gaze_targets", std::move(targets)},
          {"scr", std::move(scr)},
          {"strides", {{"left", strides_json(b.strides_left)}, {"right", strides_json(b.strides_right)}}},
          {"walkway_widths", std::move(widths)},
          {"materials", std::move(materials)}};
}

void events_from(const json& j, SessionBundle& b) {
  for (const auto& f : j.at("fixations")) b.fixations.push_back(fixation_from(f));
  for (const auto& r : j.at("gaze_targets")) {
    b.targets.push_back({fixation_from(r.at("fixation")), r.at("class_name").get<std::string>(), ts(r.at("raster_t"))});
  }
  for (const auto& p : j.at("scr")) {
    b.scr.push_back({ts(p.at("t_peak")), p.at("amplitude_us").get<double>(), p.at("rise_time_ms").get<double>()});
  }
  b.strides_left = strides_from(j.at("strides").at("left"), Foot::left);
  b.strides_right = strides_from(j.at("strides").at("right"), Foot::right);
  for (const auto& w : j.at("walkway_widths")) {
    b.widths.push_back({ts(w.at("t")), w.at("width_m").get<double>(), w.at("width_px").get<double>()});
  }
  for (const auto& m : j.at("materials")) {
    b.materials.emplace_back(ts(m.at("t")), MaterialLabel{m.at("class_name").get<std::string>(), m.at("score").get<double>(),
                                                          m.at("margin").get<double>()});
  }
}

json windows_json(const SessionBundle& b) {
  json physio = json::array();
  for (const auto& w : b.physio_windows) {
    physio.push_back({{"span", span_json(w.span)},
                      {"t_center", us(w.t_center)},
                      {"rmssd_ms", w.rmssd_ms},
                      {"pnn10", w.pnn10},
                      {"n_intervals", w.n_intervals},
                      {"scr_rate_per_min", w.scr_rate_per_min}});
  }
  json gait = json::array();
  for (const auto& w : b.gait_windows) {
    gait.push_back({{"span", span_json(w.span)},
                    {"t_center", us(w.t_center)},
                    {"mean_stride_time_s", w.mean_stride_time_s},
                    {"stv_s", w.stv_s},
                    {"n_strides", w.n_strides}});
  }
  json et = json::array(), ev = json::array();
  for (std::size_t i = 0; i < b.eda_phasic.size(); ++i) {
    et.push_back(us(b.eda_phasic.time(i)));
    ev.push_back(b.eda_phasic.value(i));
  }
  return {{"format", kBundleFormat},
          {"physio", std::move(physio)},
          {"gait", std::move(gait)},
          {"eda_phasic", {{"t", std::move(et)}, {"value_us", std::move(ev)}}}};
}

void windows_from(const json& j, SessionBundle& b) {
  for (const auto& w : j.at("physio")) {
    PhysioWindow p;
    p.span = span_from(w.at("span"));
    p.t_center = ts(w.at("t_center"));
    p.rmssd_ms = w.at("rmssd_ms").get<double>();
    p.pnn10 = w.at("pnn10").get<double>();
    p.n_intervals = w.at("n_intervals").get<std::size_t>();
    p.scr_rate_per_min = w.at("scr_rate_per_min").get<double>();
    b.physio_windows.push_back(p);
  }
  for (const auto& w : j.at("gait")) {
    GaitWindow g;
    g.span = span_from(w.at("span"));
    g.t_center = ts(w.at("t_center"));
    g.mean_stride_time_s = w.at("mean_stride_time_s").get<double>();
    g.stv_s = w.at("stv_s").get<double>();
    g.n_strides = w.at("n_strides").get<std::size_t>();
    b.gait_windows.push_back(g);
  }
  std::vector<Timestamp> et;
  for (const auto& t : j.at("eda_phasic").at("t")) et.push_back(ts(t));
  auto ev = j.at("eda_phasic").at("value_us").get<std::vector<double>>();
  b.eda_phasic = SampleSeries<double>(std::move(et), std::move(ev));
}

}  // namespace

void export_bundle(const SessionBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_json_file(dir / "bundle.json", index_json(b));
  write_json_file(dir / "trajectory.json", trajectory_json(b.trajectory));
  write_json_file(dir / "events.json", events_json(b));
  write_json_file(dir / "windows.json", windows_json(b));
  write_json_file(dir / "segments.geojson", export_geojson(b.trajectory, b.segments, b.hotspots));
}

json read_bundle_index(const std::filesystem::path& dir) {
  const auto path = dir / "bundle.json";
  if (!std::filesystem::exists(path)) throw Error(Errc::IoError, "no bundle.json in " + dir.string());
  json index = read_json_file(path);
  const auto it = index.find("format");
  if (it == index.end() || !it->is_string() || *it != kBundleFormat) {
    throw Error(Errc::VersionError, "bundle format " + (it == index.end() ? std::string("missing") : it->dump()) +
                                        ", expected " + kBundleFormat);
  }
  return index;
}

SessionBundle load_bundle(const std::filesystem::path& dir) {
  const json index = read_bundle_index(dir);
  SessionBundle b;
  try {
    b.session_id = index.at("session_id").get<std::string>();
    b.manifest = index.at("manifest");
    b.parameters = index.at("parameters");
    b.segment_spec = index.at("segment_spec").get<std::string>();
    b.warnings = index.at("warnings").get<std::vector<std::string>>();
    const auto& al = index.at("alignment");
    b.origin = geo_from(al.at("origin"));
    b.transform = transform_from(al.at("transform"));
    if (!al.at("piecewise_knots").is_null()) {
      PiecewiseAlignment pw;
      for (const auto& k : al.at("piecewise_knots")) {
        pw.knots.push_back({ts(k.at("center")), transform_from(k.at("transform")), k.at("n_anchors").get<std::size_t>()});
      }
      pw.skipped_windows = al.at("piecewise_skipped_windows").get<std::size_t>();
      b.piecewise = std::move(pw);
    }
    b.anchor_residual_rms_m = al.at("anchor_residual_rms_m").get<double>();
    b.n_anchors = al.at("n_anchors").get<std::size_t>();
    b.n_rejected_fixes = al.at("n_rejected_fixes").get<std::size_t>();
    const auto& summary = index.at("summary");
    if (!summary.at("attention").is_null()) b.attention = attention_from(summary.at("attention"));
    if (!summary.at("gait").is_null()) b.gait = gait_from(summary.at("gait"));
    const auto& hs = index.at("hotspots");
    b.hotspots.metrics = hs.at("metrics").get<std::vector<std::string>>();
    b.hotspots.z_thresh = hs.at("z_thresh").get<double>();
    b.hotspots.min_coverage = hs.at("min_coverage").get<double>();
    b.hotspots.insufficient = hs.at("insufficient").get<std::map<std::string, std::string>>();

    b.trajectory = trajectory_from(read_json_file(dir / "trajectory.json"));
    events_from(read_json_file(dir / "events.json"), b);
    windows_from(read_json_file(dir / "windows.json"), b);
    b.segments = segments_from_geojson(read_json_file(dir / "segments.geojson"), b.hotspots);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, "bundle " + dir.string() + ": " + e.what());
  }
  return b;
}

}  // namespace mobiscope
