#include "mobiscope/canonical_json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mobiscope/error.hpp"

namespace mobiscope {

namespace {

void check_finite(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw Error(Errc::IoError, "non-finite number at " + (where.empty() ? "/" : where));
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) check_finite(v, where + "/" + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], where + "/" + std::to_string(i));
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& doc) {
  check_finite(doc, "");
  // nlohmann::json keeps object members in a std::map, so keys come out sorted,
  // and floats are printed in their shortest round-trip form.
  return doc.dump() + "\n";
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  const std::string text = canonical_dump(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace mobiscope
