#pragma once

#include <stdexcept>
#include <string>

namespace csm {

enum class ErrorCode {
  FileNotFound,
  UnsupportedChannels,
  UnsupportedEncoding,
  MalformedHeader,
  IoError,
  InvalidWaveform,
  InvalidParams,
  ColaViolation,
  MissingLength,
  LengthMismatch,
  ShapeMismatch,
  InvalidMagnitude,
  InvalidFrequency,
  DegenerateSignal,
  DegenerateReference,
  RateMismatch,
  NoiseTooShort,
  NoValidFrames,
  UnsupportedBeta,
  Divergence,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedChannels: return "UnsupportedChannels";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidWaveform: return "InvalidWaveform";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ColaViolation: return "ColaViolation";
    case ErrorCode::MissingLength: return "MissingLength";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidMagnitude: return "InvalidMagnitude";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::NoiseTooShort: return "NoiseTooShort";
    case ErrorCode::NoValidFrames: return "NoValidFrames";
    case ErrorCode::UnsupportedBeta: return "UnsupportedBeta";
    case ErrorCode::Divergence: return "Divergence";
  }
  return "Unknown";
}

}  // namespace csm
