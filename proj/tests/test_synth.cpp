#include <doctest.h>

#include "mobiscope/bundle.hpp"
#include "mobiscope/canonical_json.hpp"
#include "mobiscope/pipeline.hpp"
#include "mobiscope/score.hpp"
#include "support.hpp"

using namespace mobiscope;

TEST_SUITE("synth") {
  TEST_CASE("same scenario and seed give byte-identical sessions") {
    testing::TempDir dir("synth");
    generate_session(testing::short_scenario(9), dir / "a");
    generate_session(testing::short_scenario(9), dir / "b");
    CHECK(testing::compare_trees(dir / "a", dir / "b") == "");
    generate_session(testing::short_scenario(10), dir / "c");
    CHECK(testing::compare_trees(dir / "a", dir / "c") != "");
  }

  TEST_CASE("stream seeds come from the SplitMix64 sequence in fixed order") {
    const auto seeds = derive_stream_seeds(42);
    std::uint64_t state = 42;
    for (const auto& name : synth_stream_order()) CHECK(seeds.at(name) == splitmix64(state));
    CHECK(seeds.size() == synth_stream_order().size());
  }

  TEST_CASE("splitmix64 reference values") {
    // First outputs for seed 0 from the reference implementation.
    std::uint64_t s = 0;
    CHECK(splitmix64(s) == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(s) == 0x6E789E6AA1B965F4ULL);
    CHECK(splitmix64(s) == 0x06C45D188009454FULL);
  }

  TEST_CASE("scenario documents") {
    const SynthScenario sc = testing::short_scenario(3);
    const SynthScenario back = SynthScenario::from_json(sc.to_json());
    CHECK(back.to_json() == sc.to_json());
    CHECK(SynthScenario::from_json(nlohmann::json::object()).to_json() == SynthScenario{}.to_json());
    try {
      SynthScenario::from_json({{"duration_s", 10}, {"gps_nosie_sigma_m", 1}});
      FAIL("expected ManifestError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ManifestError);
      CHECK(std::string(e.what()).find("gps_nosie_sigma_m") != std::string::npos);
    }
  }

  TEST_CASE("ground truth round trip and version check") {
    const auto s = synthesize(testing::short_scenario(2, 60));
    const auto doc = s.truth.to_json();
    CHECK(GroundTruth::from_json(doc).to_json() == doc);
    auto other = doc;
    other["format"] = "mobiscope-truth/0";
    try {
      GroundTruth::from_json(other);
      FAIL("expected VersionError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::VersionError);
    }
  }

  TEST_CASE("generated sessions validate") {
    testing::TempDir dir("synthval");
    generate_session(testing::short_scenario(5), dir.path());
    const auto report = validate_session(dir / "session.json");
    CHECK(report.ok());
    CHECK(report.session_id == "short");
    for (const auto& s : report.streams) {
      CAPTURE(s.path);
      CHECK(s.samples > 0);
      CHECK_FALSE(s.error);
    }
  }

  TEST_CASE("route model") {
    const RouteModel r({{0, 0}, {10, 0}, {10, 10}}, 2.0, true);
    CHECK(r.length() == doctest::Approx(10 + 10 + std::sqrt(200.0)));
    CHECK((r.at_time(2.5) - Eigen::Vector2d(5, 0)).norm() < 1e-12);
    CHECK((r.at_arc(r.length() + 15) - Eigen::Vector2d(10, 5)).norm() < 1e-9);
    const RouteModel open({{0, 0}, {10, 0}}, 1.0, false);
    CHECK((open.at_arc(25) - Eigen::Vector2d(10, 0)).norm() < 1e-12);
  }

  TEST_CASE("surface point lands on the requested east/north") {
    testing::Gen g(3);
    const Geodetic origin{1.2966, 103.7764, 15.0};
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector2d en(g.uniform(-3000, 3000), g.uniform(-3000, 3000));
      const Geodetic p = surface_point_at(en, origin);
      CHECK(p.h_m == 0.0);
      CHECK((wgs84_to_enu(p, origin).head<2>() - en).norm() < 1e-6);
    }
  }

  TEST_CASE("scoring") {
    testing::TempDir dir("score");
    auto manifest = generate_session(testing::short_scenario(6), dir / "s");
    const auto truth = GroundTruth::from_json(read_json_file(dir / "s" / "ground_truth.json"));
    const auto bundle = run_session(manifest);
    const auto score = score_against_truth(bundle, truth);
    CHECK(score.all_detectors_perfect());
    CHECK(score.trajectory_rmse_m < 1e-3);
    CHECK(score.scale_rel_error < 1e-6);

    // Disabling the dispersion threshold leaves no fixations.
    manifest.parameters.set("gaze.theta_base", 0.0);
    manifest.parameters.set("gaze.k_noise", 0.0);
    const auto none = score_against_truth(run_session(manifest), truth);
    CHECK(none.fixations.n_detected == 0);
    CHECK(*none.fixations.recall == 0.0);
    CHECK_FALSE(none.fixations.precision);
    CHECK(none.to_json().at("fixations").at("precision").is_null());

    SessionBundle renamed = bundle;
    renamed.session_id = "other";
    try {
      score_against_truth(renamed, truth);
      FAIL("expected ScenarioMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ScenarioMismatch);
    }
  }

  TEST_CASE("event matching tolerance") {
    const std::vector<Timestamp> truth{Timestamp{1'000'000}, Timestamp{2'000'000}, Timestamp{3'000'000}};
    const auto s = score_events(truth, {Timestamp{1'010'000}, Timestamp{2'500'000}, Timestamp{2'990'000}},
                                Duration{10'000});
    CHECK(s.n_matched == 2);
    CHECK(*s.precision == doctest::Approx(2.0 / 3));
    CHECK(*s.recall == doctest::Approx(2.0 / 3));
    // One detection cannot satisfy two truths.
    const auto d = score_events({Timestamp{0}, Timestamp{5}}, {Timestamp{2}}, Duration{10});
    CHECK(d.n_matched == 1);
  }
}
