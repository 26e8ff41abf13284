#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mobiscope {

using ParamValue = std::variant<double, bool, std::string>;

/// Every tunable default in the pipeline, keyed "module.name". Overrides are
/// type-checked against the default's type; unknown keys are rejected.
class Parameters {
 public:
  Parameters();

  static const std::map<std::string, ParamValue, std::less<>>& defaults();
  static bool is_known(std::string_view key);

  double number(std::string_view key) const;
  bool flag(std::string_view key) const;
  const std::string& text(std::string_view key) const;

  /// Throws ManifestError naming `where` on unknown key or type mismatch.
  void set(const std::string& key, const nlohmann::json& value, const std::string& where = "");
  /// Parses a textual override (`--set key=value`) using the default's type.
  void set_from_string(const std::string& key, const std::string& value);

  /// Applies every member of a JSON object as an override.
  void merge(const nlohmann::json& overrides, const std::string& where = "/parameters");

  nlohmann::json to_json() const;
  const std::map<std::string, ParamValue, std::less<>>& values() const { return values_; }

  bool operator==(const Parameters&) const = default;

 private:
  const ParamValue& get(std::string_view key) const;
  std::map<std::string, ParamValue, std::less<>> values_;
};

/// Splits a comma-separated parameter into trimmed, non-empty items.
std::vector<std::string> split_list(const std::string& text);

}  // namespace mobiscope
