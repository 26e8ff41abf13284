#include <doctest.h>

#include <fstream>

#include "mobiscope/walkway.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

SkeletonFrame standing(double head_y, double ankle_y, double conf = 0.9) {
  SkeletonFrame f;
  f.joints["nose"] = {640, head_y, conf};
  f.joints["l_ankle"] = {620, ankle_y, conf};
  f.joints["r_ankle"] = {660, ankle_y, conf};
  return f;
}

PixelScale scale_of(double mpp) { return {mpp, Timestamp{0}, 0.0}; }

LinearProbeModel random_probe(testing::Gen& g, Eigen::Index d) {
  LinearProbeModel m;
  const auto& names = default_material_classes();
  m.class_names.assign(names.begin(), names.end());
  m.weights.resize(kMaterialClasses, d);
  m.bias.resize(kMaterialClasses);
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m.weights(r, c) = g.normal();
    m.bias[r] = g.normal();
  }
  return m;
}

SampleSeries<MaterialLabel> labels(const std::string& seq) {
  std::vector<Timestamp> ts;
  std::vector<MaterialLabel> ls;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ts.push_back(Timestamp{static_cast<std::int64_t>(i) * 1'000'000});
    ls.push_back({std::string(1, seq[i]), static_cast<double>(i), 0.1});
  }
  return {ts, ls};
}

std::string names_of(const SampleSeries<MaterialLabel>& s) {
  std::string out;
  for (const auto& l : s.values()) out += l.class_name;
  return out;
}

}  // namespace

TEST_SUITE("walkway") {
  TEST_CASE("pixel scale from stature") {
    WalkwayParams p;
    p.stature_fraction = 1.0;
    CHECK(pixel_scale(standing(100, 440), Timestamp{0}, 1.70, p).meters_per_pixel == doctest::Approx(0.005).epsilon(1e-15));
    p.stature_fraction = 0.93;
    CHECK(pixel_scale(standing(100, 440), Timestamp{0}, 1.70, p).meters_per_pixel == doctest::Approx(0.00465).epsilon(1e-12));

    SkeletonFrame noankle = standing(100, 440);
    noankle.joints.erase("l_ankle");
    try {
      pixel_scale(noankle, Timestamp{0}, 1.7, p);
      FAIL("expected SkeletonIncomplete");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SkeletonIncomplete);
    }
    try {
      pixel_scale(standing(100, 130), Timestamp{0}, 1.7, p);
      FAIL("expected TooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooSmall);
    }
    CHECK_THROWS_AS(pixel_scale(standing(100, 440, 0.1), Timestamp{0}, 1.7, p), Error);
  }

  TEST_CASE("width arithmetic") {
    const WalkwayParams p;
    CHECK(estimate_width({100, 400, 500}, Timestamp{0}, scale_of(0.005), p).width_m == 300.0 * 0.005);
    CHECK(estimate_width({100, 400, 500}, Timestamp{0}, scale_of(0.005), p).width_m == doctest::Approx(1.50).epsilon(1e-15));
    CHECK(estimate_width({100, 360, 500}, Timestamp{0}, scale_of(0.005), p).width_m == doctest::Approx(1.30).epsilon(1e-15));
    try {
      estimate_width({200, 200, 500}, Timestamp{0}, scale_of(0.005), p);
      FAIL("expected EdgeOrderError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EdgeOrderError);
    }
    try {
      estimate_width({100, 400, 500}, Timestamp{5'000'000}, scale_of(0.005), p);
      FAIL("expected StaleScale");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::StaleScale);
    }
  }

  TEST_CASE("width series uses the nearest fresh scale") {
    const SampleSeries<SkeletonFrame> sk({Timestamp{0}, Timestamp{1'000'000}}, {standing(100, 440), standing(100, 400)});
    const SampleSeries<WalkwayEdges> ed({Timestamp{400'000}, Timestamp{600'000}, Timestamp{9'000'000}},
                                        {{100, 400, 500}, {100, 400, 500}, {100, 400, 500}});
    WalkwayParams p;
    p.stature_fraction = 1.0;
    const auto r = estimate_widths(sk, ed, 1.7, p);
    REQUIRE(r.widths.size() == 2);
    CHECK(r.widths[0].width_m == doctest::Approx(300 * 1.7 / 340));
    CHECK(r.widths[1].width_m == doctest::Approx(300 * 1.7 / 300));
    CHECK(r.unscaled_edges == 1);
  }

  TEST_CASE("linear probe") {
    LinearProbeModel id;
    const auto& names = default_material_classes();
    id.class_names.assign(names.begin(), names.end());
    id.weights = Eigen::MatrixXd::Identity(14, 14);
    id.bias = Eigen::VectorXd::Zero(14);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(14);
    e[3] = 1.0;
    CHECK(classify_material(e, id).class_name == names[3]);
    CHECK(classify_material(Eigen::VectorXd::Zero(14), id).class_name == names[0]);
    CHECK_THROWS_AS(classify_material(Eigen::VectorXd::Zero(13), id), Error);
  }

  TEST_CASE("property: probe equals brute-force argmax, and scale/shift invariances hold") {
    testing::Gen g(31);
    const auto m = random_probe(g, 16);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd e(16);
      for (auto& v : e) v = g.normal() * 3.0;
      std::size_t best = 0;
      double best_score = -1e300;
      for (std::size_t r = 0; r < 14; ++r) {
        double s = m.bias[static_cast<Eigen::Index>(r)];
        for (Eigen::Index c = 0; c < 16; ++c) s += m.weights(static_cast<Eigen::Index>(r), c) * e[c];
        if (s > best_score) {
          best_score = s;
          best = r;
        }
      }
      const auto got = classify_material(e, m);
      CHECK(got.class_name == m.class_names[best]);
      CHECK(got.margin >= 0.0);

      LinearProbeModel shifted = m;
      shifted.bias.array() += g.uniform(-10, 10);
      CHECK(classify_material(e, shifted).class_name == got.class_name);
      LinearProbeModel nobias = m;
      nobias.bias.setZero();
      CHECK(classify_material(2.0 * e, nobias).class_name == classify_material(e, nobias).class_name);
    }
  }

  TEST_CASE("probe file round trip and row count") {
    testing::TempDir dir("probe");
    testing::Gen g(2);
    const auto m = random_probe(g, 8);
    write_probe_model(dir / "probe.csv", m);
    CHECK(load_probe_model(dir / "probe.csv") == m);

    const std::string text = testing::read_file(dir / "probe.csv");
    testing::write_file(dir / "short.csv", text.substr(0, text.rfind('\n', text.size() - 2) + 1));
    try {
      load_probe_model(dir / "short.csv");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ParseError);
    }
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    testing::write_file(dir / "long.csv", text + last);
    CHECK_THROWS_AS(load_probe_model(dir / "long.csv"), Error);
  }

  TEST_CASE("mode smoothing") {
    const auto s = labels("AABAACCCAC");
    CHECK(smooth_materials(s, 1) == s);
    CHECK(names_of(smooth_materials(labels("AABAA"), 5)) == "AAAAA");
    CHECK(names_of(smooth_materials(labels("BBBBB"), 3)) == "BBBBB");
    // Tied windows keep the centre label.
    CHECK(names_of(smooth_materials(labels("AB"), 3)) == "AB");
    CHECK_THROWS_AS(smooth_materials(s, 4), Error);
  }
}
