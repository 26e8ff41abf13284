#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mobiscope {

enum class Errc {
  EmptyStream,
  InvalidRange,
  IoError,
  ManifestError,
  ParseError,
  StreamOrderError,
  GeodesyError,
  InsufficientAnchors,
  DegenerateGeometry,
  ImplausibleScale,
  OutOfRange,
  EmptyWindow,
  WindowTooLong,
  InsufficientData,
  RateError,
  SkeletonIncomplete,
  TooSmall,
  EdgeOrderError,
  StaleScale,
  DimError,
  InsufficientSegments,
  VersionError,
  ScenarioMismatch,
  BindError,
};

/// Module that owns an error code, e.g. "ingest" for ParseError.
std::string_view module_of(Errc code);
std::string_view name_of(Errc code);

/// All library failures are reported through this exception. `qualified()`
/// gives the module-qualified code used by the CLI, e.g. "geo_fusion.ImplausibleScale".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  std::string qualified() const;
  /// "module.Name: message"
  std::string describe() const;

 private:
  Errc code_;
};

}  // namespace mobiscope
