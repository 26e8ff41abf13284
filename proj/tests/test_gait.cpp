#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mobiscope/gait.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

SampleSeries<ImuSample> gyro_series(std::size_t n, double rate_hz, auto&& gy) {
  std::vector<Timestamp> ts;
  std::vector<ImuSample> vs;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    ts.push_back(Timestamp{std::llround(t * 1e6)});
    ImuSample s;
    s.gyro = Eigen::Vector3d(0.0, gy(t), 0.0);
    vs.push_back(s);
  }
  return {ts, vs};
}

std::vector<StrideEvent> strikes(Foot foot, const std::vector<double>& seconds) {
  std::vector<StrideEvent> v;
  for (double s : seconds) v.push_back({Timestamp{std::llround(s * 1e6)}, foot, Timestamp{}});
  return v;
}

// Walk outward until a strictly higher sample or the window edge; the base
// on each side is the lowest value seen.
double brute_prominence(const std::vector<double>& x, std::size_t p, std::size_t hw) {
  const long lo = std::max<long>(0, static_cast<long>(p) - static_cast<long>(hw));
  const long hi = std::min<long>(static_cast<long>(x.size()) - 1, static_cast<long>(p + hw));
  long l = static_cast<long>(p);
  while (l - 1 >= lo && x[static_cast<std::size_t>(l - 1)] <= x[p]) --l;
  long r = static_cast<long>(p);
  while (r + 1 <= hi && x[static_cast<std::size_t>(r + 1)] <= x[p]) ++r;
  const double lmin = *std::min_element(x.begin() + l, x.begin() + static_cast<long>(p) + 1);
  const double rmin = *std::min_element(x.begin() + static_cast<long>(p), x.begin() + r + 1);
  return x[p] - std::max(lmin, rmin);
}

}  // namespace

TEST_SUITE("gait") {
  TEST_CASE("quiescent signal has no strides") {
    CHECK(detect_strides(gyro_series(1000, 100.0, [](double) { return 0.0; }), Foot::left, {}).empty());
  }

  TEST_CASE("1 Hz sinusoid: 60 peaks, 60 heel strikes, 1.0 s strides") {
    const auto imu = gyro_series(6000, 100.0, [](double t) { return 2.0 * std::sin(2.0 * std::numbers::pi * t); });
    const auto s = detect_strides(imu, Foot::left, {});
    REQUIRE(s.size() == 60);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(std::abs(s[i].t_midswing_peak.seconds() - (0.25 + static_cast<double>(i))) < 1e-9);
      CHECK(std::abs(s[i].t_heel_strike.seconds() - (0.5 + static_cast<double>(i))) <= 1e-6);
      if (i > 0) CHECK((s[i].t_heel_strike - s[i - 1].t_heel_strike).count() == 1'000'000);
    }
    const auto m = gait_metrics(s, {});
    CHECK(m.mean_stride_time_s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.stv_s < 1e-12);
    CHECK_FALSE(m.asymmetry);
  }

  TEST_CASE("rate and axis checks") {
    CHECK_THROWS_AS(detect_strides(gyro_series(100, 20.0, [](double) { return 0.0; }), Foot::left, {}), Error);
    CHECK(gyro_axis_from_name("gx") == 0);
    CHECK(gyro_axis_from_name("gz") == 2);
    CHECK_THROWS_AS(gyro_axis_from_name("gw"), Error);
  }

  TEST_CASE("property: prominence matches a brute-force walk") {
    testing::Gen g(8);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(g.integer(3, 80)));
      for (auto& v : x) v = std::round(g.uniform(-5, 5) * 4.0) / 4.0;
      const auto p = static_cast<std::size_t>(g.integer(0, static_cast<int>(x.size()) - 1));
      const auto hw = static_cast<std::size_t>(g.integer(1, 40));
      CHECK(peak_prominence(x, p, hw) == brute_prominence(x, p, hw));
    }
  }

  TEST_CASE("gait metrics examples") {
    std::vector<double> l, r;
    for (int i = 0; i <= 10; ++i) l.push_back(i * 1.0);
    for (int i = 0; i <= 10; ++i) r.push_back(0.5 + i * 1.0);
    auto m = gait_metrics(strikes(Foot::left, l), strikes(Foot::right, r));
    CHECK(m.mean_stride_time_s == doctest::Approx(1.0));
    CHECK(m.stv_s == doctest::Approx(0.0));
    REQUIRE(m.asymmetry);
    CHECK(*m.asymmetry == doctest::Approx(0.0));
    CHECK(m.step_count == 22);

    r.clear();
    for (int i = 0; i <= 10; ++i) r.push_back(0.5 + i * 1.1);
    m = gait_metrics(strikes(Foot::left, l), strikes(Foot::right, r));
    REQUIRE(m.asymmetry);
    CHECK(*m.asymmetry == doctest::Approx(0.1 / 1.05).epsilon(1e-9));

    m = gait_metrics({}, strikes(Foot::right, r));
    CHECK_FALSE(m.asymmetry);
    CHECK(m.mean_stride_time_s == doctest::Approx(1.1));
    CHECK_THROWS_AS(gait_metrics(strikes(Foot::left, {1.0}), {}), Error);

    m = gait_metrics(strikes(Foot::left, {0.0, 1.0, 2.0, 10.0, 11.0}), {});
    CHECK(m.excluded_pauses == 1);
    CHECK(m.mean_stride_time_s == doctest::Approx(1.0));
  }

  TEST_CASE("stride SD of 30 ms is recovered within 10%") {
    SynthScenario sc = testing::short_scenario(12, 600.0);
    sc.gaze = sc.eda = sc.ibi = sc.walkway = sc.material = false;
    sc.stride_sd_s = 0.03;
    const auto s = synthesize(sc);
    const auto left = detect_strides(*s.imu_left, Foot::left, {});
    const auto right = detect_strides(*s.imu_right, Foot::right, {});
    const auto m = gait_metrics(left, right);
    // Planted SD measured on the truth strike times, same population form.
    std::vector<double> st;
    for (const auto* v : {&s.truth.heel_strikes_left, &s.truth.heel_strikes_right}) {
      for (std::size_t i = 1; i < v->size(); ++i) st.push_back(to_seconds((*v)[i] - (*v)[i - 1]));
    }
    double mean = 0.0, var = 0.0;
    for (double x : st) mean += x;
    mean /= static_cast<double>(st.size());
    for (double x : st) var += (x - mean) * (x - mean);
    const double planted_sd = std::sqrt(var / static_cast<double>(st.size()));
    CHECK(std::abs(m.stv_s - planted_sd) <= 0.1 * planted_sd);
    CHECK(std::abs(m.stv_s - 0.03) <= 0.1 * 0.03);
  }

  TEST_CASE("gait windows count strides fully inside") {
    std::vector<double> l;
    for (int i = 0; i <= 100; ++i) l.push_back(i * 1.0);
    const auto w = gait_windows(strikes(Foot::left, l), {}, Duration{10'000'000}, Duration{5'000'000});
    REQUIRE_FALSE(w.empty());
    CHECK(w.front().n_strides == 9);
    CHECK(w.front().stv_s == doctest::Approx(0.0));
  }
}
