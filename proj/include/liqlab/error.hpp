#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace liqlab {

// Error classes map one-to-one onto CLI exit codes (see exit_code()).
enum class ErrorKind {
  Config,            // invalid flags or config values
  MalformedHeader,   // tape CSV header does not match the documented layout
  UnsortedInput,     // timestamps decrease within a ticker stream
  DatasetTooSmall,
  ZeroVariance,      // a training feature column is constant
  NonFiniteLoss,     // trainer diverged
  DimensionMismatch,
  LengthMismatch,
  EmptyMatrix,
  BudgetExceeded,    // exhaustive subset search refused
  InsufficientSample,
  Format,            // malformed stage file (features/dataset/model JSON)
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "Config";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnsortedInput: return "UnsortedInput";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::InsufficientSample: return "InsufficientSample";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::MalformedHeader:
    case ErrorKind::UnsortedInput:
    case ErrorKind::Format: return 3;
    case ErrorKind::DatasetTooSmall:
    case ErrorKind::ZeroVariance:
    case ErrorKind::InsufficientSample: return 4;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::DimensionMismatch: return 5;
    case ErrorKind::LengthMismatch:
    case ErrorKind::EmptyMatrix:
    case ErrorKind::BudgetExceeded: return 6;
    case ErrorKind::Io: return 7;
  }
  return 1;
}

}  // namespace liqlab
