#include "mobiscope/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mobiscope {

using nlohmann::json;

namespace {

double coverage_of(const std::optional<TimeRange>& range, const TimeRange& seg) {
  if (!range || seg.length().count() <= 0) return 0.0;
  return static_cast<double>(overlap(*range, seg).count()) / static_cast<double>(seg.length().count());
}

/// Overlap-weighted mean of a windowed quantity plus the fraction of the
/// segment covered by the union of overlapping windows.
template <typename W, typename F>
MetricValue window_average(const std::vector<W>& windows, const TimeRange& seg, F&& field) {
  double wsum = 0.0;
  double acc = 0.0;
  std::int64_t covered = 0;
  Timestamp reach = seg.start;
  for (const auto& w : windows) {
    const Duration ov = overlap(w.span, seg);
    if (ov.count() <= 0) continue;
    const double weight = static_cast<double>(ov.count());
    wsum += weight;
    acc += weight * field(w);
    const Timestamp lo = std::max({w.span.start, seg.start, reach});
    const Timestamp hi = std::min(w.span.end, seg.end);
    if (hi > lo) {
      covered += (hi - lo).count();
      reach = hi;
    }
  }
  MetricValue m;
  if (wsum > 0.0) {
    m.value = acc / wsum;
    m.coverage = static_cast<double>(covered) / static_cast<double>(seg.length().count());
  }
  return m;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json geo_position(const Geodetic& g) { return json::array({g.lon_deg, g.lat_deg, g.h_m}); }

Geodetic position_geo(const json& p) {
  Geodetic g;
  g.lon_deg = p.at(0).get<double>();
  g.lat_deg = p.at(1).get<double>();
  g.h_m = p.size() > 2 ? p.at(2).get<double>() : 0.0;
  return g;
}

}  // namespace

SegmentSpec parse_segment_spec(const std::string& text, double min_fill) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::ManifestError, "segment spec must be distance:<m> or time:<s>");
  SegmentSpec spec;
  spec.min_fill = min_fill;
  const std::string mode = text.substr(0, colon);
  if (mode == "distance") {
    spec.mode = SegmentSpec::Mode::by_distance;
  } else if (mode == "time") {
    spec.mode = SegmentSpec::Mode::by_time;
  } else {
    throw Error(Errc::ManifestError, "unknown segment mode '" + mode + "'");
  }
  try {
    std::size_t used = 0;
    spec.length = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::ManifestError, "segment length in '" + text + "' is not a number");
  }
  if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
    throw Error(Errc::ManifestError, "segment length must be positive");
  }
  return spec;
}

std::string to_string(const SegmentSpec& spec) {
  std::ostringstream os;
  os << (spec.mode == SegmentSpec::Mode::by_distance ? "distance:" : "time:") << spec.length;
  return os.str();
}

const std::vector<std::string>& segment_metric_names() {
  static const std::vector<std::string> names = {
      "fixation_rate", "mean_fix_duration_ms", "mean_disp_h",        "mean_disp_v", "scr_rate_per_min", "rmssd_ms",
      "pnn10",         "stv_s",                "mean_stride_time_s", "step_count",  "mean_width_m"};
  return names;
}

LocatedPoint locate_arc(const FusedTrajectory& traj, double arc_m) {
  if (traj.empty()) throw Error(Errc::OutOfRange, "empty trajectory");
  const auto& pts = traj.points;
  if (arc_m <= pts.front().arc_m) return {pts.front().enu, pts.front().geo, pts.front().arc_m};
  if (arc_m >= pts.back().arc_m) return {pts.back().enu, pts.back().geo, pts.back().arc_m};
  auto it = std::lower_bound(pts.begin(), pts.end(), arc_m, [](const TrajectoryPoint& p, double v) { return p.arc_m < v; });
  if (it->arc_m == arc_m) return {it->enu, it->geo, it->arc_m};
  const auto& a = *(it - 1);
  const double alpha = (arc_m - a.arc_m) / (it->arc_m - a.arc_m);
  LocatedPoint out;
  out.enu = a.enu + alpha * (it->enu - a.enu);
  out.arc_m = arc_m;
  out.geo = enu_to_wgs84(out.enu, traj.origin);
  return out;
}

std::vector<ExperiencedSegment> build_segments(const FusedTrajectory& traj, const SegmentSpec& spec) {
  if (traj.empty()) throw Error(Errc::EmptyStream, "cannot segment an empty trajectory");
  if (!(spec.length > 0.0)) throw Error(Errc::InvalidRange, "segment length must be positive");
  std::vector<ExperiencedSegment> out;
  const auto& pts = traj.points;

  if (spec.mode == SegmentSpec::Mode::by_distance) {
    const double total = traj.total_arc_m();
    const auto n_full = static_cast<std::size_t>(std::floor(total / spec.length));
    std::vector<double> cuts;
    for (std::size_t k = 0; k <= n_full; ++k) cuts.push_back(static_cast<double>(k) * spec.length);
    const double rest = total - cuts.back();
    if (rest > 0.0 && rest >= spec.min_fill * spec.length) cuts.push_back(total);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      ExperiencedSegment s;
      s.index = k;
      s.arc_start_m = cuts[k];
      s.arc_end_m = cuts[k + 1];
      s.t_start = time_at_arc(traj, s.arc_start_m);
      s.t_end = time_at_arc(traj, s.arc_end_m);
      s.geometry.push_back(locate_arc(traj, s.arc_start_m).geo);
      auto it = std::upper_bound(pts.begin(), pts.end(), s.arc_start_m,
                                 [](double v, const TrajectoryPoint& p) { return v < p.arc_m; });
      for (; it != pts.end() && it->arc_m < s.arc_end_m; ++it) s.geometry.push_back(it->geo);
      s.geometry.push_back(locate_arc(traj, s.arc_end_m).geo);
      out.push_back(std::move(s));
    }
    return out;
  }

  const TimeRange range = traj.time_range();
  const std::int64_t step = std::llround(spec.length * 1e6);
  if (step <= 0) throw Error(Errc::InvalidRange, "segment length rounds to zero microseconds");
  const std::int64_t total = range.length().count();
  std::vector<Timestamp> cuts;
  for (std::int64_t k = 0; k * step <= total; ++k) cuts.push_back(range.start + Duration{k * step});
  const std::int64_t rest = (range.end - cuts.back()).count();
  if (rest > 0 && static_cast<double>(rest) >= spec.min_fill * static_cast<double>(step)) cuts.push_back(range.end);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    ExperiencedSegment s;
    s.index = k;
    s.t_start = cuts[k];
    s.t_end = cuts[k + 1];
    const LocatedPoint a = locate(traj, s.t_start);
    const LocatedPoint b = locate(traj, s.t_end);
    s.arc_start_m = a.arc_m;
    s.arc_end_m = b.arc_m;
    s.geometry.push_back(a.geo);
    auto it = std::upper_bound(pts.begin(), pts.end(), s.t_start,
                               [](Timestamp v, const TrajectoryPoint& p) { return v < p.t; });
    for (; it != pts.end() && it->t < s.t_end; ++it) s.geometry.push_back(it->geo);
    s.geometry.push_back(b.geo);
    out.push_back(std::move(s));
  }
  return out;
}

void attach_metrics(std::vector<ExperiencedSegment>& segments, const SegmentInputs& in) {
  for (auto& seg : segments) {
    const TimeRange span = seg.span();
    const double minutes = to_minutes(span.length());
    auto& m = seg.metrics;
    for (const auto& name : segment_metric_names()) m[name] = MetricValue{};
    if (span.length().count() <= 0) continue;

    if (in.gaze_range) {
      const double cov = coverage_of(in.gaze_range, span);
      std::size_t n = 0;
      double dur = 0.0, dh = 0.0, dv = 0.0;
      for (const auto& f : in.fixations) {
        if (!span.contains(f.midpoint())) continue;
        ++n;
        dur += to_millis(f.length());
        dh += f.disp_h;
        dv += f.disp_v;
      }
      m["fixation_rate"] = {static_cast<double>(n) / minutes, cov};
      if (n > 0) {
        const double k = static_cast<double>(n);
        m["mean_fix_duration_ms"] = {dur / k, cov};
        m["mean_disp_h"] = {dh / k, cov};
        m["mean_disp_v"] = {dv / k, cov};
      }
      std::map<std::string, double> dwell;
      for (const auto& t : in.targets) {
        if (span.contains(t.fixation.midpoint())) dwell[t.class_name] += to_millis(t.fixation.length());
      }
      seg.dwell_by_class = std::move(dwell);
      seg.dwell_coverage = cov;
    }

    if (in.eda_range) {
      const auto n = std::count_if(in.scr.begin(), in.scr.end(), [&](const ScrPeak& p) { return span.contains(p.t_peak); });
      m["scr_rate_per_min"] = {static_cast<double>(n) / minutes, coverage_of(in.eda_range, span)};
    }
    m["rmssd_ms"] = window_average(in.physio, span, [](const PhysioWindow& w) { return w.rmssd_ms; });
    m["pnn10"] = window_average(in.physio, span, [](const PhysioWindow& w) { return w.pnn10; });
    m["stv_s"] = window_average(in.gait, span, [](const GaitWindow& w) { return w.stv_s; });
    m["mean_stride_time_s"] = window_average(in.gait, span, [](const GaitWindow& w) { return w.mean_stride_time_s; });

    if (in.imu_range) {
      const auto n = std::count_if(in.strides.begin(), in.strides.end(),
                                   [&](const StrideEvent& e) { return span.contains(e.t_heel_strike); });
      m["step_count"] = {static_cast<double>(n), coverage_of(in.imu_range, span)};
    }

    if (in.width_range) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& w : in.widths) {
        if (!span.contains(w.t)) continue;
        sum += w.width_m;
        ++n;
      }
      if (n > 0) m["mean_width_m"] = {sum / static_cast<double>(n), coverage_of(in.width_range, span)};
    }

    if (in.material_range) {
      std::vector<std::pair<std::string, std::size_t>> counts;  // first-seen order
      for (const auto& [t, label] : in.materials) {
        if (!span.contains(t)) continue;
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == label.class_name; });
        if (it == counts.end()) {
          counts.emplace_back(label.class_name, 1);
        } else {
          ++it->second;
        }
      }
      if (!counts.empty()) {
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
          if (it->second > best->second) best = it;
        }
        seg.material_mode = best->first;
        seg.material_coverage = coverage_of(in.material_range, span);
      }
    }
  }
}

HotspotReport hotspot_zscores(const std::vector<ExperiencedSegment>& segments, const std::vector<std::string>& metrics,
                              double z_thresh, double min_coverage) {
  HotspotReport r;
  r.metrics = metrics;
  r.z_thresh = z_thresh;
  r.min_coverage = min_coverage;
  r.zscores.assign(segments.size(), {});
  r.hotspot.assign(segments.size(), false);
  r.coincidence.assign(segments.size(), false);
  for (const auto& name : metrics) {
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      auto it = segments[i].metrics.find(name);
      if (it != segments[i].metrics.end() && it->second.value && it->second.coverage >= min_coverage) {
        usable.push_back(i);
      }
    }
    if (usable.size() < 2) {
      r.insufficient[name] =
          Error(Errc::InsufficientSegments, std::to_string(usable.size()) + " usable segments for " + name).describe();
      continue;
    }
    double mean = 0.0;
    for (std::size_t i : usable) mean += *segments[i].metrics.at(name).value;
    mean /= static_cast<double>(usable.size());
    double ss = 0.0;
    for (std::size_t i : usable) {
      const double d = *segments[i].metrics.at(name).value - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(usable.size()));
    // Rounding in the mean leaves a tiny SD for a constant metric.
    const bool flat = sd <= 1e-12 * std::abs(mean);
    for (std::size_t i : usable) {
      const double z = !flat && sd > 0.0 ? (*segments[i].metrics.at(name).value - mean) / sd : 0.0;
      r.zscores[i][name] = z;
      if (std::abs(z) >= z_thresh) r.hotspot[i] = true;
    }
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& z = r.zscores[i];
    auto at_least = [&](const char* key) {
      auto it = z.find(key);
      return it != z.end() && it->second >= z_thresh;
    };
    r.coincidence[i] = at_least("scr_rate_per_min") && (at_least("mean_disp_h") || at_least("mean_disp_v"));
  }
  return r;
}

json export_geojson(const FusedTrajectory& traj, const std::vector<ExperiencedSegment>& segments,
                    const HotspotReport& report) {
  json features = json::array();
  {
    json coords = json::array();
    for (const auto& p : traj.points) coords.push_back(geo_position(p.geo));
    if (coords.size() == 1) coords.push_back(coords.front());
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
                        {"properties",
                         {{"feature", "trajectory"},
                          {"t_start", traj.empty() ? 0 : traj.points.front().t.micros_utc},
                          {"t_end", traj.empty() ? 0 : traj.points.back().t.micros_utc},
                          {"total_arc_m", traj.total_arc_m()}}}});
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    json coords = json::array();
    for (const auto& g : s.geometry) coords.push_back(geo_position(g));
    json props = {{"feature", "segment"},
                  {"index", s.index},
                  {"t_start", s.t_start.micros_utc},
                  {"t_end", s.t_end.micros_utc},
                  {"arc_start_m", s.arc_start_m},
                  {"arc_end_m", s.arc_end_m}};
    json coverage = json::object();
    for (const auto& [name, mv] : s.metrics) {
      if (name == "step_count" && mv.value) {
        props[name] = static_cast<std::int64_t>(std::llround(*mv.value));
      } else {
        props[name] = optional_number(mv.value);
      }
      coverage[name] = mv.coverage;
    }
    props["dwell_by_class"] = s.dwell_by_class ? json(*s.dwell_by_class) : json(nullptr);
    coverage["dwell_by_class"] = s.dwell_coverage;
    props["material_mode"] = s.material_mode ? json(*s.material_mode) : json(nullptr);
    coverage["material_mode"] = s.material_coverage;
    props["sample_coverage"] = std::move(coverage);
    props["zscores"] = i < report.zscores.size() ? json(report.zscores[i]) : json::object();
    props["flags"] = {{"hotspot", i < report.hotspot.size() && report.hotspot[i]},
                      {"coincidence", i < report.coincidence.size() && report.coincidence[i]}};
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
                        {"properties", std::move(props)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

std::vector<ExperiencedSegment> segments_from_geojson(const json& doc, HotspotReport& report) {
  std::vector<ExperiencedSegment> out;
  report.zscores.clear();
  report.hotspot.clear();
  report.coincidence.clear();
  try {
    for (const auto& f : doc.at("features")) {
      const auto& p = f.at("properties");
      if (p.at("feature") != "segment") continue;
      ExperiencedSegment s;
      s.index = p.at("index").get<std::size_t>();
      s.t_start = Timestamp{p.at("t_start").get<std::int64_t>()};
      s.t_end = Timestamp{p.at("t_end").get<std::int64_t>()};
      s.arc_start_m = p.at("arc_start_m").get<double>();
      s.arc_end_m = p.at("arc_end_m").get<double>();
      for (const auto& c : f.at("geometry").at("coordinates")) s.geometry.push_back(position_geo(c));
      const auto& cov = p.at("sample_coverage");
      for (const auto& name : segment_metric_names()) {
        MetricValue mv;
        if (!p.at(name).is_null()) mv.value = p.at(name).get<double>();
        mv.coverage = cov.at(name).get<double>();
        s.metrics[name] = mv;
      }
      if (!p.at("dwell_by_class").is_null()) s.dwell_by_class = p.at("dwell_by_class").get<std::map<std::string, double>>();
      s.dwell_coverage = cov.at("dwell_by_class").get<double>();
      if (!p.at("material_mode").is_null()) s.material_mode = p.at("material_mode").get<std::string>();
      s.material_coverage = cov.at("material_mode").get<double>();
      report.zscores.push_back(p.at("zscores").get<std::map<std::string, double>>());
      report.hotspot.push_back(p.at("flags").at("hotspot").get<bool>());
      report.coincidence.push_back(p.at("flags").at("coincidence").get<bool>());
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("segments document: ") + e.what());
  }
  return out;
}

}  // namespace mobiscope
