#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tacmod {

enum class ErrorKind {
  InvariantViolation,
  Io,
  MalformedManifest,
  TruncatedPayload,
  VersionMismatch,
  NoContact,
  NonMonotonicLoading,
  WindowTooShort,
  ZeroContactArea,
  DegenerateGeometry,
  DegenerateFit,
  RigidLimitExceeded,
  ObjectTooLarge,
  OutOfRange,
  NumericalFault,
  EmptySplit,
  InvalidValue,
  LengthMismatch,
  ZeroGrasps,
  PathMissing,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::Io: return "Io";
    case ErrorKind::MalformedManifest: return "MalformedManifest";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::NoContact: return "NoContact";
    case ErrorKind::NonMonotonicLoading: return "NonMonotonicLoading";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::ZeroContactArea: return "ZeroContactArea";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::RigidLimitExceeded: return "RigidLimitExceeded";
    case ErrorKind::ObjectTooLarge: return "ObjectTooLarge";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NumericalFault: return "NumericalFault";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroGrasps: return "ZeroGrasps";
    case ErrorKind::PathMissing: return "PathMissing";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const char* what) {
  if (!condition) fail(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace tacmod
