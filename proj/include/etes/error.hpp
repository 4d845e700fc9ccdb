#pragma once

#include <stdexcept>
#include <string>

namespace etes {

enum class ErrorKind {
  InitialOutsideDomain,
  ZenoSuspected,
  StepSizeInvalid,
  NonFiniteState,
  NoCrossingFound,
  DimensionMismatch,
  DitherInvalid,
  MinimizerUnknown,
  InsufficientDomain,
  ConfigInvalid,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. Every failure carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InitialOutsideDomain: return "InitialOutsideDomain";
    case ErrorKind::ZenoSuspected: return "ZenoSuspected";
    case ErrorKind::StepSizeInvalid: return "StepSizeInvalid";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NoCrossingFound: return "NoCrossingFound";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DitherInvalid: return "DitherInvalid";
    case ErrorKind::MinimizerUnknown: return "MinimizerUnknown";
    case ErrorKind::InsufficientDomain: return "InsufficientDomain";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace etes
