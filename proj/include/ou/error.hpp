#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ou {

enum class ErrorCode {
  NonSymmetric,
  NotPSD,
  BadParameter,
  WindowExceeded,
  IntegratorDiverged,
  FitFailed,
  QuadratureStalled,
  NoDecay,
  BadCertificate,
  NonPositiveMean,
  StepTooLarge,
  ConfigInvalid,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::WindowExceeded: return "WindowExceeded";
    case ErrorCode::IntegratorDiverged: return "IntegratorDiverged";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::QuadratureStalled: return "QuadratureStalled";
    case ErrorCode::NoDecay: return "NoDecay";
    case ErrorCode::BadCertificate: return "BadCertificate";
    case ErrorCode::NonPositiveMean: return "NonPositiveMean";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ou
