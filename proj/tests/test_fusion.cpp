#include <doctest.h>

#include <cmath>

#include "mobiscope/fusion.hpp"
#include "mobiscope/geodesy.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

const Geodetic kOrigin{45.5017, -73.5673, 30.0};

Timestamp sec(double s) { return Timestamp{std::llround(s * 1e6)}; }

/// Straight eastward walk at 1 m/s, one point per metre, ending at `length_m`.
FusedTrajectory straight(double length_m) {
  std::vector<Timestamp> t;
  std::vector<EnuPoint> p;
  for (int i = 0; i <= static_cast<int>(std::floor(length_m)); ++i) {
    t.push_back(sec(i));
    p.emplace_back(i, 0.0, 0.0);
  }
  if (p.back().x() < length_m) {
    t.push_back(sec(length_m));
    p.emplace_back(length_m, 0.0, 0.0);
  }
  return make_trajectory(std::move(t), p, kOrigin);
}

FusedTrajectory wander(testing::Gen& g, int n) {
  std::vector<Timestamp> t;
  std::vector<EnuPoint> p;
  EnuPoint x = EnuPoint::Zero();
  double heading = 0.0;
  for (int i = 0; i < n; ++i) {
    t.push_back(sec(i));
    p.push_back(x);
    heading += g.normal() * 0.2;
    x += EnuPoint(std::cos(heading), std::sin(heading), 0.0) * g.uniform(0.5, 1.8);
  }
  return make_trajectory(std::move(t), p, kOrigin);
}

ExperiencedSegment with_metric(const std::string& name, std::optional<double> v, double cov = 1.0) {
  ExperiencedSegment s;
  s.metrics[name] = {v, cov};
  return s;
}

double polyline_length(const nlohmann::json& coords) {
  double len = 0.0;
  for (std::size_t i = 1; i < coords.size(); ++i) {
    auto enu = [&](const nlohmann::json& c) {
      return wgs84_to_enu({c.at(1).get<double>(), c.at(0).get<double>(), c.at(2).get<double>()}, kOrigin);
    };
    len += (enu(coords[i]) - enu(coords[i - 1])).norm();
  }
  return len;
}

}  // namespace

TEST_SUITE("fusion") {
  TEST_CASE("segment spec parsing") {
    CHECK(parse_segment_spec("distance:10") == SegmentSpec{SegmentSpec::Mode::by_distance, 10.0, 0.5});
    CHECK(parse_segment_spec("time:30", 0.25) == SegmentSpec{SegmentSpec::Mode::by_time, 30.0, 0.25});
    CHECK(to_string(parse_segment_spec("time:2.5")) == "time:2.5");
    for (const char* bad : {"distance", "space:10", "distance:0", "distance:-3", "distance:10m", "time:"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_segment_spec(bad), Error);
    }
  }

  TEST_CASE("distance segmentation keeps a partial tail at half a segment") {
    const SegmentSpec spec;
    CHECK(build_segments(straight(100.0), spec).size() == 10);
    CHECK(build_segments(straight(95.0), spec).size() == 10);
    CHECK(build_segments(straight(94.9), spec).size() == 9);
    const auto segs = build_segments(straight(95.0), spec);
    CHECK(segs.back().arc_end_m == doctest::Approx(95.0));
    CHECK(segs.back().t_end == sec(95.0));
  }

  TEST_CASE("time segmentation") {
    const auto segs = build_segments(straight(100.0), {SegmentSpec::Mode::by_time, 30.0, 0.5});
    REQUIRE(segs.size() == 3);  // 30+30+30 then a 10 s tail below half
    CHECK(segs[2].t_end == sec(90));
    CHECK(segs[1].arc_start_m == doctest::Approx(30.0));
  }

  TEST_CASE("property: segments tile the trajectory without gaps or overlap") {
    testing::Gen g(8);
    for (int trial = 0; trial < 40; ++trial) {
      const auto traj = wander(g, g.integer(20, 400));
      const SegmentSpec spec{trial % 2 ? SegmentSpec::Mode::by_time : SegmentSpec::Mode::by_distance,
                             g.uniform(2.0, 40.0), 0.5};
      std::vector<ExperiencedSegment> segs;
      try {
        segs = build_segments(traj, spec);
      } catch (const Error&) {
        continue;
      }
      if (segs.empty()) continue;
      CHECK(segs.front().t_start == traj.points.front().t);
      CHECK(segs.front().arc_start_m == 0.0);
      for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(segs[i].index == i);
        CHECK(segs[i].t_start < segs[i].t_end);
        if (i > 0) {
          CHECK(segs[i].t_start == segs[i - 1].t_end);
          CHECK(segs[i].arc_start_m == segs[i - 1].arc_end_m);
        }
      }
      const double covered = segs.back().arc_end_m;
      const double total = traj.total_arc_m();
      CHECK(covered <= total + 1e-9);
      // Whatever is left over is a dropped tail shorter than half a segment.
      const double tail = spec.mode == SegmentSpec::Mode::by_distance
                              ? total - covered
                              : to_seconds(traj.points.back().t - segs.back().t_end);
      CHECK(tail < 0.5 * spec.length + 1e-9);
    }
  }

  TEST_CASE("point events attach by timestamp and fixations by midpoint") {
    auto segs = build_segments(straight(120.0), {SegmentSpec::Mode::by_time, 60.0, 0.5});
    REQUIRE(segs.size() == 2);
    SegmentInputs in;
    in.eda_range = TimeRange{sec(0), sec(120)};
    for (double t : {5.0, 20.0, 59.9}) in.scr.push_back({sec(t), 0.2, 500});
    in.scr.push_back({sec(60.0), 0.2, 500});
    in.gaze_range = TimeRange{sec(0), sec(120)};
    Fixation f;
    f.t_start = sec(59.0);
    f.t_end = sec(61.2);  // midpoint 60.1 s
    f.disp_h = 0.01;
    in.fixations.push_back(f);
    attach_metrics(segs, in);
    CHECK(*segs[0].metrics.at("scr_rate_per_min").value == doctest::Approx(3.0));
    CHECK(*segs[1].metrics.at("scr_rate_per_min").value == doctest::Approx(1.0));
    CHECK(*segs[0].metrics.at("fixation_rate").value == 0.0);
    CHECK(*segs[1].metrics.at("fixation_rate").value == doctest::Approx(1.0));
    CHECK_FALSE(segs[0].metrics.at("mean_disp_h").value);
    CHECK(segs[1].metrics.at("scr_rate_per_min").coverage == doctest::Approx(1.0));
    // Modalities without a range stay absent.
    CHECK_FALSE(segs[0].metrics.at("step_count").value);
    CHECK_FALSE(segs[0].metrics.at("mean_width_m").value);
    CHECK_FALSE(segs[0].material_mode);
  }

  TEST_CASE("windowed metrics use overlap weights") {
    auto segs = build_segments(straight(100.0), {SegmentSpec::Mode::by_time, 100.0, 0.5});
    REQUIRE(segs.size() == 1);
    SegmentInputs in;
    PhysioWindow a, b;
    a.span = {sec(-20), sec(40)};  // 40 s inside
    a.rmssd_ms = 10;
    b.span = {sec(40), sec(50)};  // 10 s inside
    b.rmssd_ms = 60;
    in.physio = {a, b};
    attach_metrics(segs, in);
    CHECK(*segs[0].metrics.at("rmssd_ms").value == doctest::Approx((40 * 10.0 + 10 * 60.0) / 50));
    CHECK(segs[0].metrics.at("rmssd_ms").coverage == doctest::Approx(0.5));
  }

  TEST_CASE("z-scores") {
    std::vector<ExperiencedSegment> segs;
    for (double v : {1.0, 1.0, 1.0, 5.0}) segs.push_back(with_metric("scr_rate_per_min", v));
    const auto r = hotspot_zscores(segs, {"scr_rate_per_min"}, 1.5);
    CHECK(r.zscores[3].at("scr_rate_per_min") == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(r.zscores[0].at("scr_rate_per_min") == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(r.hotspot == std::vector<bool>{false, false, false, true});

    std::vector<ExperiencedSegment> flat(3, with_metric("pnn10", 0.4));
    const auto z0 = hotspot_zscores(flat, {"pnn10"}, 2.0);
    for (const auto& z : z0.zscores) CHECK(z.at("pnn10") == 0.0);

    const auto few = hotspot_zscores({with_metric("pnn10", 0.4), with_metric("pnn10", 0.5, 0.1)}, {"pnn10"}, 2.0);
    CHECK(few.insufficient.count("pnn10") == 1);
    CHECK(few.insufficient.at("pnn10").find("InsufficientSegments") != std::string::npos);
  }

  TEST_CASE("property: usable z-scores have mean 0 and SD 1") {
    testing::Gen g(77);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<ExperiencedSegment> segs;
      const int n = g.integer(3, 60);
      for (int i = 0; i < n; ++i) {
        const bool missing = g.uniform() < 0.2;
        segs.push_back(with_metric("rmssd_ms", missing ? std::nullopt : std::optional<double>(g.normal() * 20 + 40),
                                   g.uniform()));
      }
      const auto r = hotspot_zscores(segs, {"rmssd_ms"}, 2.0, 0.3);
      const auto n_usable = std::count_if(segs.begin(), segs.end(), [](const ExperiencedSegment& s) {
        const auto& m = s.metrics.at("rmssd_ms");
        return m.value && m.coverage >= 0.3;
      });
      CHECK(r.insufficient.count("rmssd_ms") == (n_usable < 2 ? 1u : 0u));
      std::vector<double> z;
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& m = segs[i].metrics.at("rmssd_ms");
        const bool usable = n_usable >= 2 && m.value && m.coverage >= 0.3;
        CHECK(r.zscores[i].count("rmssd_ms") == (usable ? 1u : 0u));
        if (usable) z.push_back(r.zscores[i].at("rmssd_ms"));
      }
      if (z.size() < 2) continue;
      double mean = 0.0, ss = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(z.size());
      for (double v : z) ss += (v - mean) * (v - mean);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(ss / static_cast<double>(z.size())) - 1.0) < 1e-9);
    }
  }

  TEST_CASE("coincidence needs SCR and a dispersion metric over threshold") {
    const std::vector<std::string> metrics{"scr_rate_per_min", "mean_disp_h", "mean_disp_v"};
    auto seg = [](double scr, double dh, double dv) {
      ExperiencedSegment s;
      s.metrics["scr_rate_per_min"] = {scr, 1.0};
      s.metrics["mean_disp_h"] = {dh, 1.0};
      s.metrics["mean_disp_v"] = {dv, 1.0};
      return s;
    };
    std::vector<ExperiencedSegment> segs(9, seg(1, 1, 1));
    segs.push_back(seg(10, 10, 1));  // both high
    segs.push_back(seg(10, 1, 1));   // SCR only
    segs.push_back(seg(1, 1, 10));   // dispersion only
    const auto r = hotspot_zscores(segs, metrics, 1.0);
    CHECK(r.coincidence[9]);
    CHECK_FALSE(r.coincidence[10]);
    CHECK_FALSE(r.coincidence[11]);
    CHECK(r.hotspot[10]);
    CHECK(r.hotspot[11]);
  }

  TEST_CASE("GeoJSON export") {
    const auto traj = straight(100.0);
    auto segs = build_segments(traj, {});
    attach_metrics(segs, {});
    const auto report = hotspot_zscores(segs, {"scr_rate_per_min"}, 2.0);
    const auto doc = export_geojson(traj, segs, report);
    CHECK(doc.at("features").size() == 11);
    CHECK(testing::rfc7946_violations(doc).empty());
    const auto& first = doc.at("features").at(1).at("geometry").at("coordinates").at(0);
    CHECK(first.at(0).get<double>() == doctest::Approx(kOrigin.lon_deg).epsilon(1e-12));
    CHECK(first.at(1).get<double>() == doctest::Approx(kOrigin.lat_deg).epsilon(1e-12));

    HotspotReport back;
    CHECK(segments_from_geojson(nlohmann::json::parse(doc.dump()), back) == segs);
    CHECK(back.hotspot == report.hotspot);
  }

  TEST_CASE("property: segment geometry length matches its arc span") {
    testing::Gen g(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto traj = wander(g, g.integer(50, 300));
      auto segs = build_segments(traj, {SegmentSpec::Mode::by_distance, g.uniform(3, 25), 0.5});
      attach_metrics(segs, {});
      const auto doc = nlohmann::json::parse(export_geojson(traj, segs, {}).dump());
      CHECK(testing::rfc7946_violations(doc).empty());
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& f = doc.at("features").at(i + 1);
        CHECK(std::abs(polyline_length(f.at("geometry").at("coordinates")) - (segs[i].arc_end_m - segs[i].arc_start_m)) <
              1e-6);
      }
    }
  }
}
