#ifndef FORMSIM_ERROR_HPP
#define FORMSIM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace formsim {

enum class ErrorCode {
  IndexOutOfRange,
  SelfLoop,
  DimensionMismatch,
  NotConnected,
  NoLeader,
  InvalidArgument,
  NonFiniteState,
  EmptyTrajectory,
  NonConstantReference,
  FrozenLayer,
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::NoLeader: return "NoLeader";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::NonConstantReference: return "NonConstantReference";
    case ErrorCode::FrozenLayer: return "FrozenLayer";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace formsim

#endif  // FORMSIM_ERROR_HPP
