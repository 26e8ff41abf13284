#include "mobiscope/manifest.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "mobiscope/error.hpp"

namespace mobiscope {

namespace {

constexpr std::array<std::pair<StreamKind, std::string_view>, 12> kKindNames{{
    {StreamKind::gps, "gps"},
    {StreamKind::slam_pose, "slam_pose"},
    {StreamKind::gaze, "gaze"},
    {StreamKind::head_flow, "head_flow"},
    {StreamKind::label_raster, "label_raster"},
    {StreamKind::eda, "eda"},
    {StreamKind::ibi, "ibi"},
    {StreamKind::imu_foot_left, "imu_foot_left"},
    {StreamKind::imu_foot_right, "imu_foot_right"},
    {StreamKind::skeleton, "skeleton"},
    {StreamKind::walkway_edges, "walkway_edges"},
    {StreamKind::material_embedding, "material_embedding"},
}};

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw Error(Errc::ManifestError, pointer + ": " + what);
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& pointer) {
  if (!obj.is_object() || !obj.contains(key)) fail(pointer + "/" + key, "missing field");
  return obj.at(key);
}

std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& pointer) {
  const auto& v = require(obj, key, pointer);
  if (!v.is_string()) fail(pointer + "/" + key, "expected string");
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(StreamKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<StreamKind> stream_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<StreamKind>& all_stream_kinds() {
  static const std::vector<StreamKind> kinds = [] {
    std::vector<StreamKind> out;
    for (const auto& [k, n] : kKindNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

const StreamDecl* SessionManifest::find(StreamKind kind) const {
  for (const auto& s : streams) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

nlohmann::json SessionManifest::to_json() const {
  nlohmann::json doc;
  doc["session_id"] = session_id;
  doc["participant"] = {{"id", participant.id},
                        {"stature_m", participant.stature_m},
                        {"cohort_tag", participant.cohort_tag}};
  doc["streams"] = nlohmann::json::array();
  for (const auto& s : streams) {
    nlohmann::json j = {{"kind", std::string(to_string(s.kind))},
                        {"path", s.path},
                        {"clock_offset_us", s.clock_offset_us}};
    if (s.nominal_rate_hz) j["nominal_rate_hz"] = *s.nominal_rate_hz;
    doc["streams"].push_back(std::move(j));
  }
  doc["parameters"] = overrides;
  return doc;
}

SessionManifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) fail("", "manifest must be a JSON object");
  SessionManifest m;
  m.base_dir = base_dir;

  m.session_id = require_string(doc, "session_id", "");
  if (m.session_id.empty()) fail("/session_id", "must be non-empty");

  const auto& p = require(doc, "participant", "");
  if (!p.is_object()) fail("/participant", "expected object");
  m.participant.id = require_string(p, "id", "/participant");
  const auto& stature = require(p, "stature_m", "/participant");
  if (!stature.is_number()) fail("/participant/stature_m", "expected number");
  m.participant.stature_m = stature.get<double>();
  if (!(m.participant.stature_m > 1.0 && m.participant.stature_m < 2.2)) {
    fail("/participant/stature_m", "stature must lie in (1.0, 2.2) m");
  }
  if (p.contains("cohort_tag")) m.participant.cohort_tag = require_string(p, "cohort_tag", "/participant");

  const auto& streams = require(doc, "streams", "");
  if (!streams.is_array()) fail("/streams", "expected array");
  std::set<StreamKind> seen;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const std::string ptr = "/streams/" + std::to_string(i);
    const auto& s = streams[i];
    if (!s.is_object()) fail(ptr, "expected object");
    StreamDecl decl;
    const std::string kind = require_string(s, "kind", ptr);
    const auto parsed = stream_kind_from_string(kind);
    if (!parsed) fail(ptr + "/kind", "unknown stream kind '" + kind + "'");
    decl.kind = *parsed;
    if (!seen.insert(decl.kind).second) fail(ptr + "/kind", "duplicate stream kind '" + kind + "'");
    decl.path = require_string(s, "path", ptr);
    if (s.contains("clock_offset_us")) {
      const auto& off = s.at("clock_offset_us");
      if (!off.is_number_integer()) fail(ptr + "/clock_offset_us", "expected integer microseconds");
      decl.clock_offset_us = off.get<std::int64_t>();
    }
    if (s.contains("nominal_rate_hz") && !s.at("nominal_rate_hz").is_null()) {
      const auto& r = s.at("nominal_rate_hz");
      if (!r.is_number() || !(r.get<double>() > 0.0)) fail(ptr + "/nominal_rate_hz", "expected positive number");
      decl.nominal_rate_hz = r.get<double>();
    }
    if (!std::filesystem::exists(base_dir / decl.path)) {
      fail(ptr + "/path", "file not found: " + decl.path);
    }
    m.streams.push_back(std::move(decl));
  }

  if (doc.contains("parameters")) {
    const auto& params = doc.at("parameters");
    if (!params.is_object()) fail("/parameters", "expected object");
    m.parameters.merge(params, "/parameters");
    m.overrides = params;
  }
  return m;
}

SessionManifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ManifestError, path.string() + ": invalid JSON: " + e.what());
  }
  return manifest_from_json(doc, path.parent_path());
}

}  // namespace mobiscope
