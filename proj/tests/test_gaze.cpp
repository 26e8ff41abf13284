#include <doctest.h>

#include <algorithm>

#include "mobiscope/gaze.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

SampleSeries<GazeSample> constant_gaze(std::size_t n, double rate_hz, double x, double y) {
  std::vector<Timestamp> ts;
  std::vector<GazeSample> gs;
  for (std::size_t i = 0; i < n; ++i) {
    ts.push_back(Timestamp{std::llround(static_cast<double>(i) * 1e6 / rate_hz)});
    gs.push_back({x, y, 1.0});
  }
  return {ts, gs};
}

Fixation fix_at(double cx, double cy, std::int64_t t0_us, std::int64_t t1_us) {
  Fixation f;
  f.cx = cx;
  f.cy = cy;
  f.t_start = Timestamp{t0_us};
  f.t_end = Timestamp{t1_us};
  return f;
}

LabelRaster raster4(const std::string& centre_class) {
  LabelRaster r;
  r.width = 4;
  r.height = 4;
  r.classes.assign(16, 0);
  r.legend = {{0, "sky"}, {1, centre_class}, {2, "road"}};
  r.classes[2 * 4 + 2] = 1;
  r.classes[0 * 4 + 1] = 2;
  return r;
}

}  // namespace

TEST_SUITE("gaze") {
  TEST_CASE("dispersion") {
    const std::vector<GazeSample> same(5, GazeSample{0.3, 0.3, 1.0});
    CHECK(dispersion(same).h == 0.0);
    std::vector<GazeSample> w = {{0.10, 0.20, 1}, {0.14, 0.21, 1}, {0.12, 0.205, 1}};
    auto d = dispersion(w);
    CHECK(d.h == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(d.v == doctest::Approx(0.01).epsilon(1e-12));
    std::reverse(w.begin(), w.end());
    CHECK(dispersion(w).h == d.h);
    CHECK_THROWS_AS(dispersion(std::span<const GazeSample>{}), Error);
  }

  TEST_CASE("head-motion compensation") {
    const auto gaze = constant_gaze(100, 100.0, 0.5, 0.5);
    std::vector<HeadFlow> zero(100, HeadFlow{0.0, 0.0});
    const SampleSeries<HeadFlow> still({gaze.times().begin(), gaze.times().end()}, zero);
    CHECK(compensate_head_motion(gaze, still).gaze == gaze);

    std::vector<HeadFlow> drift(100, HeadFlow{0.001, 0.0});
    const SampleSeries<HeadFlow> pan({gaze.times().begin(), gaze.times().end()}, drift);
    const auto c = compensate_head_motion(gaze, pan);
    CHECK(c.gaze.values().back().gx == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(c.gaze.values().back().gy == 0.5);
  }

  TEST_CASE("property: tracking a world point under head pan stays constant") {
    testing::Gen g(17);
    for (int trial = 0; trial < 20; ++trial) {
      const double wx = g.uniform(0.3, 0.7), wy = g.uniform(0.3, 0.7);
      std::vector<Timestamp> ts;
      std::vector<GazeSample> gz;
      std::vector<HeadFlow> fl;
      double sx = 0.0, sy = 0.0;
      for (int i = 0; i < 500; ++i) {
        const double du = g.uniform(-0.002, 0.002), dv = g.uniform(-0.002, 0.002);
        sx += du;
        sy += dv;
        ts.push_back(Timestamp{i * 10'000});
        fl.push_back({du, dv});
        gz.push_back({wx + sx, wy + sy, 1.0});
      }
      const auto c = compensate_head_motion(SampleSeries<GazeSample>(ts, gz), SampleSeries<HeadFlow>(ts, fl));
      for (const auto& s : c.gaze.values()) {
        CHECK(std::abs(s.gx - wx) < 1e-9);
        CHECK(std::abs(s.gy - wy) < 1e-9);
      }
    }
  }

  TEST_CASE("I-DT: stationary series is one fixation, a sweep is none") {
    const auto still = constant_gaze(300, 200.0, 0.5, 0.5);
    const auto f = detect_fixations_idt(still, {});
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == still.front_time());
    CHECK(f[0].t_end == still.back_time());
    CHECK(f[0].disp_h == 0.0);
    CHECK(f[0].disp_v == 0.0);

    std::vector<Timestamp> ts;
    std::vector<GazeSample> gz;
    for (int i = 0; i < 90; ++i) {
      ts.push_back(Timestamp{i * 5000});
      gz.push_back({0.05 + 0.01 * i, 0.5, 1.0});
    }
    IdtParams p;
    p.theta_base = 0.02;
    p.k_noise = 0.0;
    CHECK(detect_fixations_idt(SampleSeries<GazeSample>(ts, gz), p).empty());
  }

  TEST_CASE("property: planted clusters are recovered with exact boundaries") {
    testing::Gen g(99);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Timestamp> ts;
      std::vector<GazeSample> gz;
      std::vector<std::pair<Timestamp, Timestamp>> planted;
      std::int64_t t = 0;
      double px = -1.0;
      const int clusters = g.integer(3, 12);
      for (int c = 0; c < clusters; ++c) {
        double x = 0.0;
        do x = g.uniform(0.1, 0.9);
        while (std::abs(x - px) < 0.2);
        px = x;
        const double y = g.uniform(0.1, 0.9);
        const int n = g.integer(40, 120);  // 200 ms or more at 200 Hz
        planted.push_back({Timestamp{t}, Timestamp{t + (n - 1) * 5000}});
        for (int i = 0; i < n; ++i) {
          ts.push_back(Timestamp{t});
          gz.push_back({x + g.uniform(-0.003, 0.003), y + g.uniform(-0.003, 0.003), 1.0});
          t += 5000;
        }
      }
      const auto f = detect_fixations_idt(SampleSeries<GazeSample>(ts, gz), {});
      REQUIRE(f.size() == planted.size());
      for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(std::abs((f[i].t_start - planted[i].first).count()) <= 5000);
        CHECK(std::abs((f[i].t_end - planted[i].second).count()) <= 5000);
      }
    }
  }

  TEST_CASE("low-confidence samples are dropped before detection") {
    auto s = constant_gaze(100, 100.0, 0.5, 0.5);
    std::vector<GazeSample> v(s.values().begin(), s.values().end());
    for (std::size_t i = 40; i < 60; ++i) v[i].confidence = 0.1;
    const auto f = detect_fixations_idt(SampleSeries<GazeSample>({s.times().begin(), s.times().end()}, v), {});
    REQUIRE(f.size() == 1);
    CHECK(f[0].n_samples == 80);
  }

  TEST_CASE("raster intersection") {
    const SampleSeries<LabelRaster> rasters({Timestamp{0}}, {raster4("vegetation")});
    auto r = intersect_fixations(std::vector{fix_at(0.5, 0.5, 0, 100'000)}, rasters, Duration{500'000});
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].class_name == "vegetation");

    r = intersect_fixations(std::vector{fix_at(0.5, 0.5, 2'000'000, 2'100'000)}, rasters, Duration{500'000});
    CHECK(r.records.empty());
    CHECK(r.unmatched == 1);

    // 0.25 on a 4-wide grid falls in cell 1.
    r = intersect_fixations(std::vector{fix_at(0.25, 0.0, 0, 100'000)}, rasters, Duration{500'000});
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].class_name == "road");
  }

  TEST_CASE("attention metrics") {
    std::vector<Fixation> fs;
    for (int i = 0; i < 12; ++i) fs.push_back(fix_at(0.5, 0.5, i * 10'000'000, i * 10'000'000 + 200'000));
    auto m = attention_metrics(fs, {}, Duration{120'000'000});
    CHECK(m.fixation_rate_per_min == doctest::Approx(6.0).epsilon(1e-12));

    m = attention_metrics({}, {}, Duration{60'000'000});
    CHECK(m == AttentionMetrics{});

    const std::vector<Fixation> two = {fix_at(0.5, 0.5, 0, 200'000), fix_at(0.5, 0.5, 1'000'000, 1'400'000)};
    const std::vector<GazeTargetRecord> targets = {{two[0], "signage", Timestamp{0}}, {two[1], "signage", Timestamp{0}}};
    m = attention_metrics(two, targets, Duration{60'000'000});
    CHECK(m.dwell_by_class.at("signage") == doctest::Approx(600.0));
    CHECK(m.mean_duration_ms == doctest::Approx(300.0));
  }
}
