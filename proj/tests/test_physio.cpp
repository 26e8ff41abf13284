#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mobiscope/physio.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

SampleSeries<double> sampled(std::size_t n, double rate_hz, auto&& f) {
  std::vector<Timestamp> ts;
  std::vector<double> vs;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    ts.push_back(Timestamp{std::llround(t * 1e6)});
    vs.push_back(f(t));
  }
  return {ts, vs};
}

double brute_rmssd(const std::vector<double>& x) {
  std::vector<long double> d;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) d.push_back(static_cast<long double>(x[i + 1]) - x[i]);
  long double sq = 0.0L;
  for (auto v : d) sq += v * v;
  return static_cast<double>(std::sqrt(sq / static_cast<long double>(d.size())));
}

double brute_pnn10(const std::vector<double>& x) {
  int over = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) over += std::fabs(x[i + 1] - x[i]) > 10.0 ? 1 : 0;
  return static_cast<double>(over) / static_cast<double>(x.size() - 1);
}

SampleSeries<double> ibi_series(const std::vector<double>& ms) {
  std::vector<Timestamp> ts;
  std::int64_t t = 0;
  for (double v : ms) {
    t += std::llround(v * 1000.0);
    ts.push_back(Timestamp{t});
  }
  return {ts, ms};
}

}  // namespace

TEST_SUITE("physio") {
  TEST_CASE("rmssd and pnn10 worked example") {
    const std::vector<double> x = {800, 810, 790};
    CHECK(rmssd(x) == doctest::Approx(15.811388300841896).epsilon(1e-12));
    CHECK(pnn10(x) == 0.5);
    const std::vector<double> flat(10, 800.0);
    CHECK(rmssd(flat) == 0.0);
    CHECK(pnn10(flat) == 0.0);
    std::vector<double> up;
    for (int i = 0; i < 10; ++i) up.push_back(700.0 + 11.0 * i);
    CHECK(pnn10(up) == 1.0);
    CHECK_THROWS_AS(rmssd(std::vector<double>{800.0}), Error);
  }

  TEST_CASE("property: HRV measures match brute-force definitions") {
    testing::Gen g(1234);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(g.integer(2, 200)));
      for (auto& v : x) v = std::round(g.uniform(400.0, 1400.0) * 4.0) / 4.0;
      const double r = rmssd(x), b = brute_rmssd(x);
      CHECK(std::abs(r - b) <= 1e-9 * std::max(1.0, b));
      CHECK(pnn10(x) == brute_pnn10(x));
    }
  }

  TEST_CASE("order sensitivity of rmssd") {
    const std::vector<double> a = {800, 900, 800, 900}, b = {800, 800, 900, 900};
    CHECK(rmssd(a) != rmssd(b));
  }

  TEST_CASE("EDA decomposition") {
    const auto flat = sampled(200, 4.0, [](double) { return 0.3; });
    auto d = decompose_eda(flat, Duration{8'000'000});
    for (std::size_t i = 0; i < flat.size(); ++i) {
      CHECK(d.tonic.value(i) == 0.3);
      CHECK(d.phasic.value(i) == 0.0);
    }

    const auto ramp = sampled(400, 4.0, [](double t) { return 0.3 + 0.01 * t; });
    d = decompose_eda(ramp, Duration{8'000'000});
    for (std::size_t i = 20; i + 20 < ramp.size(); ++i) CHECK(std::abs(d.phasic.value(i)) < 1e-6);

    const auto bump = sampled(400, 4.0, [](double t) { return 0.3 + 0.2 * std::exp(-(t - 50) * (t - 50) / (2 * 0.5 * 0.5)); });
    d = decompose_eda(bump, Duration{8'000'000});
    const double peak = *std::max_element(d.phasic.values().begin(), d.phasic.values().end());
    CHECK(peak == doctest::Approx(0.2).epsilon(0.1));

    CHECK_THROWS_AS(decompose_eda(sampled(10, 4.0, [](double) { return 1.0; }), Duration{8'000'000}), Error);
  }

  TEST_CASE("property: tonic + phasic reproduces the input") {
    testing::Gen g(77);
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = sampled(static_cast<std::size_t>(g.integer(40, 600)), 4.0, [&](double) { return g.uniform(0.1, 20.0); });
      const auto d = decompose_eda(s, Duration{8'000'000});
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(d.tonic.value(i) + d.phasic.value(i) - s.value(i)) <= 1e-9);
    }
  }

  TEST_CASE("SCR detection") {
    const auto zero = sampled(100, 4.0, [](double) { return 0.0; });
    CHECK(detect_scr_peaks(zero, {}).empty());

    const std::vector<double> planted = {20.0, 50.0, 80.0, 110.0, 140.0};
    const auto eda = sampled(640, 4.0, [&](double t) {
      double v = 2.0;
      for (double c : planted) v += 0.2 * std::exp(-(t - c) * (t - c) / (2 * 0.5 * 0.5));
      return v;
    });
    const auto peaks = detect_scr_peaks(decompose_eda(eda, Duration{8'000'000}).phasic, {});
    REQUIRE(peaks.size() == planted.size());
    for (std::size_t i = 0; i < peaks.size(); ++i) CHECK(std::abs(peaks[i].t_peak.seconds() - planted[i]) <= 0.25);

    const auto pair = sampled(80, 4.0, [](double t) {
      return 0.3 * std::exp(-(t - 10.0) * (t - 10.0) / 0.02) + 0.2 * std::exp(-(t - 10.5) * (t - 10.5) / 0.02);
    });
    const auto one = detect_scr_peaks(pair, {});
    REQUIRE(one.size() == 1);
    CHECK(one[0].t_peak.seconds() == doctest::Approx(10.0));
  }

  TEST_CASE("physio windows") {
    const auto uniform = ibi_series(std::vector<double>(200, 800.0));
    const auto w = physio_windows(uniform, {}, Duration{60'000'000}, Duration{5'000'000});
    REQUIRE_FALSE(w.empty());
    for (const auto& x : w) {
      CHECK(x.rmssd_ms == 0.0);
      CHECK(x.pnn10 == 0.0);
      CHECK(x.scr_rate_per_min == 0.0);
    }
    const std::vector<ScrPeak> scr = {{Timestamp{5'000'000}, 0.2, 0}, {Timestamp{20'000'000}, 0.2, 0}, {Timestamp{40'000'000}, 0.2, 0}};
    const auto first = physio_windows(uniform, scr, Duration{60'000'000}, Duration{5'000'000}).front();
    CHECK(first.scr_rate_per_min == doctest::Approx(3.0));

    CHECK(physio_windows(ibi_series(std::vector<double>(5, 800.0)), {}, Duration{3'000'000}, Duration{1'000'000}).empty());
  }

  TEST_CASE("sliding windows are half-open and fit the range") {
    const auto w = sliding_windows(Timestamp{0}, Timestamp{100}, Duration{30}, Duration{10});
    REQUIRE(w.size() == 8);
    CHECK(w.back().end.micros_utc <= 101);
    CHECK_THROWS_AS(sliding_windows(Timestamp{0}, Timestamp{100}, Duration{5}, Duration{10}), Error);
  }

  TEST_CASE("IBI filter") {
    const auto r = filter_ibi(ibi_series({800, 250, 900, 2500, 700}));
    CHECK(r.kept.size() == 3);
    CHECK(r.dropped == 2);
  }
}
