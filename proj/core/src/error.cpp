#include "artex/error.hpp"

namespace artex {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DatasetEmpty: return "DatasetEmpty";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::FabricEmpty: return "FabricEmpty";
    case ErrorCode::UnknownFabric: return "UnknownFabric";
    case ErrorCode::ParamError: return "ParamError";
    case ErrorCode::InputShapeError: return "InputShapeError";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::StrategyMisuse: return "StrategyMisuse";
    case ErrorCode::InternalError: return "InternalError";
    case ErrorCode::DistributionError: return "DistributionError";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::LogParseError: return "LogParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParamError:
    case ErrorCode::SpecError:
    case ErrorCode::StrategyMisuse:
      return 1;
    case ErrorCode::NumericalDivergence:
      return 3;
    default:
      return 2;
  }
}

}  // namespace artex
