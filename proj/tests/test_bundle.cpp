#include <doctest.h>

#include "mobiscope/bundle.hpp"
#include "mobiscope/canonical_json.hpp"
#include "mobiscope/pipeline.hpp"
#include "mobiscope/score.hpp"
#include "support.hpp"

using namespace mobiscope;

namespace {

struct Fixture {
  testing::TempDir dir{"bundle"};
  SessionManifest manifest;
  SessionBundle bundle;
  GroundTruth truth;

  Fixture() {
    manifest = generate_session(testing::short_scenario(4), dir / "session");
    bundle = run_session(manifest);
    truth = GroundTruth::from_json(read_json_file(dir / "session" / "ground_truth.json"));
  }
};

}  // namespace

TEST_SUITE("bundle") {
  TEST_CASE("export then load gives the same bundle") {
    Fixture fx;
    export_bundle(fx.bundle, fx.dir / "out");
    const SessionBundle back = load_bundle(fx.dir / "out");
    CHECK(back.trajectory == fx.bundle.trajectory);
    CHECK(back.fixations == fx.bundle.fixations);
    CHECK(back.scr == fx.bundle.scr);
    CHECK(back.segments == fx.bundle.segments);
    CHECK(back.hotspots == fx.bundle.hotspots);
    CHECK(back == fx.bundle);

    // Exporting the reloaded bundle reproduces the files byte for byte.
    export_bundle(back, fx.dir / "again");
    CHECK(testing::compare_trees(fx.dir / "out", fx.dir / "again") == "");
  }

  TEST_CASE("planted events are all recovered") {
    Fixture fx;
    CHECK(fx.bundle.scr.size() == fx.truth.scr_peaks.size());
    CHECK(fx.bundle.fixations.size() == fx.truth.fixations.size());
    CHECK(fx.bundle.strides_left.size() == fx.truth.heel_strikes_left.size());
    CHECK(fx.bundle.strides_right.size() == fx.truth.heel_strikes_right.size());
    CHECK(fx.bundle.session_id == "short");
    CHECK(fx.bundle.warnings.empty());
  }

  TEST_CASE("missing or foreign bundles are rejected") {
    testing::TempDir dir("nobundle");
    try {
      load_bundle(dir.path());
      FAIL("expected IoError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::IoError);
    }

    Fixture fx;
    export_bundle(fx.bundle, fx.dir / "out");
    auto index = read_json_file(fx.dir / "out" / "bundle.json");
    index["format"] = "mobiscope-bundle/99";
    write_json_file(fx.dir / "out" / "bundle.json", index);
    try {
      load_bundle(fx.dir / "out");
      FAIL("expected VersionError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::VersionError);
    }
    index.erase("format");
    write_json_file(fx.dir / "out" / "bundle.json", index);
    CHECK_THROWS_AS(load_bundle(fx.dir / "out"), Error);
  }

  TEST_CASE("segments file is valid GeoJSON") {
    Fixture fx;
    export_bundle(fx.bundle, fx.dir / "out");
    const auto doc = read_json_file(fx.dir / "out" / "segments.geojson");
    CHECK(testing::rfc7946_violations(doc).empty());
    CHECK(doc.at("features").size() == fx.bundle.segments.size() + 1);
  }
}
