#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secnav {

enum class ErrorCode {
  InvalidArgument,
  DegenerateInput,
  InsufficientAnchors,
  DegenerateGeometry,
  SingularInnovation,
  ZeroSpeed,
  ZeroLengthTruth,
  EmptyCluster,
  DisconnectedCorridor,
  ParseError,
  VersionMismatch,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InsufficientAnchors: return "InsufficientAnchors";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::ZeroSpeed: return "ZeroSpeed";
    case ErrorCode::ZeroLengthTruth: return "ZeroLengthTruth";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::DisconnectedCorridor: return "DisconnectedCorridor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace secnav
