#include "dlroc/error.hpp"

namespace dlroc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::BadExponent: return "BadExponent";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewColumns: return "TooFewColumns";
    case ErrorKind::ZeroAtom: return "ZeroAtom";
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::ZeroCode: return "ZeroCode";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::InsufficientGroups: return "InsufficientGroups";
    case ErrorKind::EmptyMeasurement: return "EmptyMeasurement";
    case ErrorKind::BadModel: return "BadModel";
  }
  return "Unknown";
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadExponent:
    case ErrorKind::AlphaOutOfRange:
    case ErrorKind::BadParameter:
    case ErrorKind::BadSpec:
    case ErrorKind::InsufficientGroups:
    case ErrorKind::EmptyMeasurement:
      return true;
    default:
      return false;
  }
}

}  // namespace dlroc
