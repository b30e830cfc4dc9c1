#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gltunnel {

enum class ErrorCode {
  NonpositiveRadius,
  StepTooLarge,
  OutOfRange,
  NoPositiveStart,
  AxisCrossed,
  ThetaBarTooSmall,
  EtaTooLarge,
  NormalizationFailed,
  BlendNotPositive,
  RadiusMismatch,
  LTooSmall,
  InsufficientGrid,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every module of the library. The code identifies the
/// failed contract; the message carries the offending values.
class TunnelError : public std::runtime_error {
 public:
  TunnelError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonpositiveRadius: return "NonpositiveRadius";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoPositiveStart: return "NoPositiveStart";
    case ErrorCode::AxisCrossed: return "AxisCrossed";
    case ErrorCode::ThetaBarTooSmall: return "ThetaBarTooSmall";
    case ErrorCode::EtaTooLarge: return "EtaTooLarge";
    case ErrorCode::NormalizationFailed: return "NormalizationFailed";
    case ErrorCode::BlendNotPositive: return "BlendNotPositive";
    case ErrorCode::RadiusMismatch: return "RadiusMismatch";
    case ErrorCode::LTooSmall: return "LTooSmall";
    case ErrorCode::InsufficientGrid: return "InsufficientGrid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace gltunnel
