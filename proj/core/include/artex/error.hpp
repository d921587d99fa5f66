#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace artex {

enum class ErrorCode {
  // dataset
  DatasetEmpty,
  DecodeError,
  FabricEmpty,
  UnknownFabric,
  // parameters and shapes
  ParamError,
  InputShapeError,
  ShapeError,
  // classifier
  EmptyReference,
  NumericalDivergence,
  // engine
  SpecError,
  StrategyMisuse,
  InternalError,
  // metrics
  DistributionError,
  EmptyProfile,
  AlignmentError,
  // harness
  ConfigError,
  ManifestError,
  LogParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status for the CLI: 1 config, 2 data, 3 numerical divergence.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace artex
