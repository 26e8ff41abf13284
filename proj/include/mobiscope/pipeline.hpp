#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobiscope/bundle.hpp"
#include "mobiscope/ingest.hpp"
#include "mobiscope/manifest.hpp"

namespace mobiscope {

struct StreamSummary {
  StreamKind kind = StreamKind::gps;
  std::string path;
  std::size_t samples = 0;
  std::optional<Timestamp> first;
  std::optional<Timestamp> last;
  std::optional<std::string> error;
};

struct ValidationReport {
  std::string session_id;
  std::vector<StreamSummary> streams;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Parses the manifest and every declared stream, collecting rather than
/// throwing errors.
ValidationReport validate_session(const std::filesystem::path& manifest_path);

using StreamMap = std::map<StreamKind, StreamData>;

/// Parses all declared streams concurrently; the first failure in declaration
/// order is rethrown.
StreamMap load_streams(const SessionManifest& manifest);

SegmentSpec segment_spec_from(const Parameters& params);

/// Runs every analysis the available streams allow. GPS and SLAM are
/// required; any other missing stream leaves its metrics absent and adds a
/// warning.
SessionBundle run_pipeline(const SessionManifest& manifest, const StreamMap& streams);

SessionBundle run_session(const SessionManifest& manifest);

/// Every effective parameter plus the warnings of the run.
nlohmann::json run_report(const SessionManifest& manifest, const SessionBundle& bundle);

}  // namespace mobiscope
