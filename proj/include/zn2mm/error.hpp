#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zn2mm {

enum class ErrorCode {
  LengthExceedsN,
  ZeroVariableForInverse,
  RepeatedVariable,
  SingularContent,
  ChargeMismatch,
  NegativeIndexUnsupported,
  QuadratureNotConverged,
  DivergentDeformation,
  Divergent,
  WindowTooSmall,
  NUnsupported,
  TruncationNotConverged,
  BoundExceeded,
  InvalidArgument,
  ConfigError,
};

inline std::string_view error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::LengthExceedsN: return "LengthExceedsN";
    case ErrorCode::ZeroVariableForInverse: return "ZeroVariableForInverse";
    case ErrorCode::RepeatedVariable: return "RepeatedVariable";
    case ErrorCode::SingularContent: return "SingularContent";
    case ErrorCode::ChargeMismatch: return "ChargeMismatch";
    case ErrorCode::NegativeIndexUnsupported: return "NegativeIndexUnsupported";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DivergentDeformation: return "DivergentDeformation";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::NUnsupported: return "NUnsupported";
    case ErrorCode::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorCode::BoundExceeded: return "BoundExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status and a machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace zn2mm
