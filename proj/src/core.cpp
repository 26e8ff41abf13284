#include "mobiscope/error.hpp"

namespace mobiscope {

std::string_view module_of(Errc code) {
  switch (code) {
    case Errc::EmptyStream:
    case Errc::InvalidRange:
      return "core";
    case Errc::IoError:
    case Errc::ManifestError:
    case Errc::ParseError:
    case Errc::StreamOrderError:
      return "ingest";
    case Errc::GeodesyError:
    case Errc::InsufficientAnchors:
    case Errc::DegenerateGeometry:
    case Errc::ImplausibleScale:
    case Errc::OutOfRange:
      return "geo_fusion";
    case Errc::EmptyWindow:
      return "gaze";
    case Errc::WindowTooLong:
    case Errc::InsufficientData:
      return "physio";
    case Errc::RateError:
      return "gait";
    case Errc::SkeletonIncomplete:
    case Errc::TooSmall:
    case Errc::EdgeOrderError:
    case Errc::StaleScale:
    case Errc::DimError:
      return "walkway";
    case Errc::InsufficientSegments:
    case Errc::VersionError:
      return "fusion";
    case Errc::ScenarioMismatch:
      return "synth";
    case Errc::BindError:
      return "cli";
  }
  return "unknown";
}

std::string_view name_of(Errc code) {
  switch (code) {
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::IoError: return "IoError";
    case Errc::ManifestError: return "ManifestError";
    case Errc::ParseError: return "ParseError";
    case Errc::StreamOrderError: return "StreamOrderError";
    case Errc::GeodesyError: return "GeodesyError";
    case Errc::InsufficientAnchors: return "InsufficientAnchors";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::ImplausibleScale: return "ImplausibleScale";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::WindowTooLong: return "WindowTooLong";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::RateError: return "RateError";
    case Errc::SkeletonIncomplete: return "SkeletonIncomplete";
    case Errc::TooSmall: return "TooSmall";
    case Errc::EdgeOrderError: return "EdgeOrderError";
    case Errc::StaleScale: return "StaleScale";
    case Errc::DimError: return "DimError";
    case Errc::InsufficientSegments: return "InsufficientSegments";
    case Errc::VersionError: return "VersionError";
    case Errc::ScenarioMismatch: return "ScenarioMismatch";
    case Errc::BindError: return "BindError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(name_of(code)) + ": " + message), code_(code) {}

std::string Error::describe() const {
  return qualified() + std::string(what()).substr(name_of(code_).size());
}

std::string Error::qualified() const {
  return std::string(module_of(code_)) + "." + std::string(name_of(code_));
}

}  // namespace mobiscope
