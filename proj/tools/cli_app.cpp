#include "cli_app.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mobiscope/bundle.hpp"
#include "mobiscope/canonical_json.hpp"
#include "mobiscope/pipeline.hpp"
#include "mobiscope/score.hpp"
#include "mobiscope/serve.hpp"
#include "mobiscope/synth.hpp"

namespace mobiscope::cli {

namespace fs = std::filesystem;

namespace {

fs::path manifest_path(const fs::path& session) {
  std::error_code ec;
  return fs::is_directory(session, ec) ? session / "session.json" : session;
}

struct FuseOptions {
  std::string session;
  std::string out;
  std::vector<std::string> sets;
  std::string segments;
  std::string params_file;
  bool json = false;
};

int cmd_validate(const std::string& session, bool as_json, std::ostream& out) {
  const ValidationReport report = validate_session(manifest_path(session));
  if (as_json) {
    out << canonical_dump(report.to_json());
  } else {
    out << report.to_text();
  }
  return report.ok() ? 0 : 1;
}

int cmd_fuse(const FuseOptions& o, std::ostream& out) {
  SessionManifest manifest = parse_manifest(manifest_path(o.session));
  // Precedence: manifest, then a run report's parameters, then --segments, then --set.
  if (!o.params_file.empty()) {
    const auto doc = read_json_file(o.params_file);
    const auto& params = doc.contains("parameters") ? doc.at("parameters") : doc;
    manifest.parameters.merge(params, o.params_file);
  }
  if (!o.segments.empty()) {
    const SegmentSpec spec = parse_segment_spec(o.segments, manifest.parameters.number("fusion.min_fill"));
    manifest.parameters.set("fusion.segment_mode", spec.mode == SegmentSpec::Mode::by_distance ? "distance" : "time");
    manifest.parameters.set("fusion.segment_length", spec.length);
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(Errc::ManifestError, "--set expects key=value, got '" + kv + "'");
    manifest.parameters.set_from_string(kv.substr(0, eq), kv.substr(eq + 1));
  }

  const SessionBundle bundle = run_session(manifest);
  export_bundle(bundle, o.out);
  const auto report = run_report(manifest, bundle);
  write_json_file(fs::path(o.out) / "run_report.json", report);
  if (o.json) {
    out << canonical_dump(report);
  } else {
    out << "bundle written to " << o.out << " (" << bundle.segments.size() << " segments, "
        << bundle.trajectory.points.size() << " trajectory points)\n";
    for (const auto& w : bundle.warnings) out << "warning: " << w << "\n";
  }
  return 0;
}

int cmd_export_geojson(const std::string& bundle_dir, const std::string& out_file, std::ostream& out) {
  const SessionBundle b = load_bundle(bundle_dir);
  write_json_file(out_file, export_geojson(b.trajectory, b.segments, b.hotspots));
  out << "wrote " << out_file << "\n";
  return 0;
}

int cmd_synth(const std::string& scenario_file, std::optional<std::uint64_t> seed, const std::string& out_dir,
              std::ostream& out) {
  SynthScenario sc = scenario_file.empty() ? SynthScenario{} : load_scenario(scenario_file);
  if (seed) sc.seed = *seed;
  const auto manifest = generate_session(sc, out_dir);
  out << "session " << manifest.session_id << " written to " << out_dir << " (" << manifest.streams.size()
      << " streams, seed " << sc.seed << ")\n";
  return 0;
}

int cmd_score(const std::string& bundle_dir, const std::string& truth_file, std::ostream& out) {
  const SessionBundle b = load_bundle(bundle_dir);
  const GroundTruth truth = GroundTruth::from_json(read_json_file(truth_file));
  out << canonical_dump(score_against_truth(b, truth).to_json());
  return 0;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mobiscope: multimodal walking-session fusion"};
  app.require_subcommand(1);

  std::string v_session;
  bool v_json = false;
  auto* validate = app.add_subcommand("validate", "Parse a session and report per-stream counts and errors");
  validate->add_option("--session", v_session, "Session directory or session.json")->required();
  validate->add_flag("--json", v_json, "Print the report as JSON");

  FuseOptions fo;
  auto* fuse = app.add_subcommand("fuse", "Run the full pipeline and write a bundle");
  fuse->add_option("--session", fo.session, "Session directory or session.json")->required();
  fuse->add_option("--out", fo.out, "Bundle output directory")->required();
  fuse->add_option("--set", fo.sets, "Parameter override key=value (repeatable)");
  fuse->add_option("--segments", fo.segments, "Segment spec, e.g. distance:10 or time:30");
  fuse->add_option("--params", fo.params_file, "JSON parameters or an earlier run_report.json");
  fuse->add_flag("--json", fo.json, "Print the run report");

  std::string e_bundle, e_out;
  auto* exportg = app.add_subcommand("export-geojson", "Write a standalone segments.geojson from a bundle");
  exportg->add_option("--bundle", e_bundle, "Bundle directory")->required();
  exportg->add_option("--out", e_out, "Output file")->required();

  std::string s_scenario, s_out;
  std::optional<std::uint64_t> s_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic session with ground truth");
  synth->add_option("--scenario", s_scenario, "Scenario JSON (defaults when omitted)");
  synth->add_option("--seed", s_seed, "Override the scenario seed");
  synth->add_option("--out", s_out, "Session output directory")->required();

  std::string sv_bundle, sv_host = "127.0.0.1";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve a bundle directory read-only over HTTP");
  serve->add_option("--bundle", sv_bundle, "Bundle directory")->required();
  serve->add_option("--port", sv_port, "TCP port")->capture_default_str();
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();

  std::string sc_bundle, sc_truth;
  auto* score = app.add_subcommand("score", "Score a bundle against synthetic ground truth");
  score->add_option("--bundle", sc_bundle, "Bundle directory")->required();
  score->add_option("--truth", sc_truth, "ground_truth.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*validate) return cmd_validate(v_session, v_json, out);
    if (*fuse) return cmd_fuse(fo, out);
    if (*exportg) return cmd_export_geojson(e_bundle, e_out, out);
    if (*synth) return cmd_synth(s_scenario, s_seed, s_out, out);
    if (*score) return cmd_score(sc_bundle, sc_truth, out);
    if (*serve) {
      serve_bundle(sv_bundle, sv_port, sv_host);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.describe() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace mobiscope::cli
