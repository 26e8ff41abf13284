#include "support.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "cli_app.hpp"

namespace testing {

using nlohmann::json;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("mobiscope_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

namespace {

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

void check_position(const json& p, const std::string& where, std::vector<std::string>& errs) {
  if (!p.is_array() || p.size() < 2 || p.size() > 3) {
    errs.push_back(where + ": position must hold 2 or 3 numbers");
    return;
  }
  for (const auto& c : p) {
    if (!c.is_number() || !std::isfinite(c.get<double>())) {
      errs.push_back(where + ": non-numeric coordinate");
      return;
    }
  }
  const double lon = p[0].get<double>(), lat = p[1].get<double>();
  if (lon < -180.0 || lon > 180.0) errs.push_back(where + ": longitude out of range");
  if (lat < -90.0 || lat > 90.0) errs.push_back(where + ": latitude out of range");
}

void check_positions(const json& a, std::size_t min, const std::string& where, std::vector<std::string>& errs) {
  if (!a.is_array() || a.size() < min) {
    errs.push_back(where + ": needs at least " + std::to_string(min) + " positions");
    return;
  }
  for (std::size_t i = 0; i < a.size(); ++i) check_position(a[i], where + "/" + std::to_string(i), errs);
}

void check_ring(const json& ring, const std::string& where, std::vector<std::string>& errs) {
  check_positions(ring, 4, where, errs);
  if (ring.is_array() && ring.size() >= 4 && ring.front() != ring.back()) errs.push_back(where + ": ring not closed");
}

void check_bbox(const json& obj, const std::string& where, std::vector<std::string>& errs) {
  if (!obj.contains("bbox")) return;
  const auto& b = obj.at("bbox");
  if (!b.is_array() || (b.size() != 4 && b.size() != 6)) errs.push_back(where + "/bbox: must hold 4 or 6 numbers");
}

void check_geometry(const json& g, const std::string& where, std::vector<std::string>& errs) {
  if (!g.is_object() || !g.contains("type") || !g.at("type").is_string()) {
    errs.push_back(where + ": geometry needs a string type");
    return;
  }
  if (g.contains("crs")) errs.push_back(where + ": crs member is not allowed");
  check_bbox(g, where, errs);
  const std::string type = g.at("type");
  if (type == "GeometryCollection") {
    if (!g.contains("geometries") || !g.at("geometries").is_array()) {
      errs.push_back(where + ": geometries must be an array");
      return;
    }
    for (std::size_t i = 0; i < g.at("geometries").size(); ++i) {
      check_geometry(g.at("geometries")[i], where + "/geometries/" + std::to_string(i), errs);
    }
    return;
  }
  if (!g.contains("coordinates")) {
    errs.push_back(where + ": coordinates missing");
    return;
  }
  const auto& c = g.at("coordinates");
  const std::string cw = where + "/coordinates";
  if (type == "Point") {
    check_position(c, cw, errs);
  } else if (type == "MultiPoint") {
    check_positions(c, 0, cw, errs);
  } else if (type == "LineString") {
    check_positions(c, 2, cw, errs);
  } else if (type == "MultiLineString") {
    if (!c.is_array()) errs.push_back(cw + ": expected array");
    else for (std::size_t i = 0; i < c.size(); ++i) check_positions(c[i], 2, cw + "/" + std::to_string(i), errs);
  } else if (type == "Polygon") {
    if (!c.is_array()) errs.push_back(cw + ": expected array");
    else for (std::size_t i = 0; i < c.size(); ++i) check_ring(c[i], cw + "/" + std::to_string(i), errs);
  } else if (type == "MultiPolygon") {
    if (!c.is_array()) {
      errs.push_back(cw + ": expected array");
    } else {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i].is_array()) errs.push_back(cw + ": expected array");
        else for (std::size_t j = 0; j < c[i].size(); ++j) check_ring(c[i][j], cw + "/" + std::to_string(i) + "/" + std::to_string(j), errs);
      }
    }
  } else {
    errs.push_back(where + ": unknown geometry type " + type);
  }
}

}  // namespace

std::string compare_trees(const fs::path& a, const fs::path& b) {
  const auto fa = files_under(a), fb = files_under(b);
  if (fa != fb) return "file lists differ";
  for (const auto& f : fa) {
    if (read_file(a / f) != read_file(b / f)) return f + " differs";
  }
  return "";
}

std::vector<std::string> rfc7946_violations(const json& doc) {
  std::vector<std::string> errs;
  if (!doc.is_object()) return {"root: not an object"};
  if (doc.value("type", "") != "FeatureCollection") errs.push_back("root: type must be FeatureCollection");
  if (doc.contains("crs")) errs.push_back("root: crs member is not allowed");
  check_bbox(doc, "root", errs);
  if (!doc.contains("features") || !doc.at("features").is_array()) {
    errs.push_back("root: features must be an array");
    return errs;
  }
  for (std::size_t i = 0; i < doc.at("features").size(); ++i) {
    const auto& f = doc.at("features")[i];
    const std::string w = "/features/" + std::to_string(i);
    if (!f.is_object() || f.value("type", "") != "Feature") {
      errs.push_back(w + ": type must be Feature");
      continue;
    }
    if (!f.contains("geometry")) errs.push_back(w + ": geometry member missing");
    else if (!f.at("geometry").is_null()) check_geometry(f.at("geometry"), w + "/geometry", errs);
    if (!f.contains("properties")) errs.push_back(w + ": properties member missing");
    else if (!f.at("properties").is_object() && !f.at("properties").is_null()) errs.push_back(w + ": properties must be object or null");
    if (f.contains("id") && !f.at("id").is_string() && !f.at("id").is_number()) errs.push_back(w + ": id must be string or number");
    if (f.contains("crs")) errs.push_back(w + ": crs member is not allowed");
    check_bbox(f, w, errs);
  }
  return errs;
}

int run_cli(const std::vector<std::string>& args, std::string* out, std::string* err) {
  std::vector<std::string> storage = {"mobiscope"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  std::ostringstream o, e;
  const int rc = mobiscope::cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

namespace {

// 140 m loop: a minute of walking already turns a corner.
std::vector<Eigen::Vector2d> compact_loop() { return {{0.0, 0.0}, {40.0, 0.0}, {40.0, 30.0}, {0.0, 30.0}}; }

}  // namespace

mobiscope::SynthScenario short_scenario(std::uint64_t seed, double duration_s) {
  mobiscope::SynthScenario sc;
  sc.session_id = "short";
  sc.seed = seed;
  sc.duration_s = duration_s;
  sc.scr_count = 3;
  sc.waypoints = compact_loop();
  return sc;
}

mobiscope::SynthScenario geo_only_scenario(std::uint64_t seed, double duration_s) {
  mobiscope::SynthScenario sc;
  sc.session_id = "geo";
  sc.seed = seed;
  sc.duration_s = duration_s;
  sc.waypoints = compact_loop();
  sc.gaze = sc.eda = sc.ibi = sc.imu = sc.walkway = sc.material = false;
  return sc;
}

}  // namespace testing
