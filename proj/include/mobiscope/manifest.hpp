#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mobiscope/params.hpp"

namespace mobiscope {

enum class StreamKind {
  gps,
  slam_pose,
  gaze,
  head_flow,
  label_raster,
  eda,
  ibi,
  imu_foot_left,
  imu_foot_right,
  skeleton,
  walkway_edges,
  material_embedding,
};

std::string_view to_string(StreamKind kind);
std::optional<StreamKind> stream_kind_from_string(std::string_view name);
const std::vector<StreamKind>& all_stream_kinds();

struct StreamDecl {
  StreamKind kind = StreamKind::gps;
  std::string path;
  std::int64_t clock_offset_us = 0;
  std::optional<double> nominal_rate_hz;

  bool operator==(const StreamDecl&) const = default;
};

struct Participant {
  std::string id;
  double stature_m = 1.7;
  std::string cohort_tag;

  bool operator==(const Participant&) const = default;
};

struct SessionManifest {
  std::string session_id;
  Participant participant;
  std::vector<StreamDecl> streams;
  /// Effective parameters: defaults with `overrides` applied.
  Parameters parameters;
  nlohmann::json overrides = nlohmann::json::object();
  /// Directory the manifest was read from; stream paths resolve against it.
  std::filesystem::path base_dir;

  const StreamDecl* find(StreamKind kind) const;
  std::filesystem::path resolve(const StreamDecl& decl) const { return base_dir / decl.path; }

  /// Manifest document as declared (parameters block holds only the overrides).
  nlohmann::json to_json() const;
};

/// Reads and validates `session.json`. Errors carry a JSON pointer to the
/// offending field.
SessionManifest parse_manifest(const std::filesystem::path& path);

/// Validates an in-memory manifest document; `base_dir` is used for the
/// file-existence check.
SessionManifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

}  // namespace mobiscope
