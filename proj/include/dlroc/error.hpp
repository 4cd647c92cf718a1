#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dlroc {

enum class ErrorKind {
  NonFiniteInput,
  BadExponent,
  AlphaOutOfRange,
  BadParameter,
  DimensionMismatch,
  TooFewColumns,
  ZeroAtom,
  ZeroColumn,
  IndexOutOfRange,
  InsufficientData,
  NonFiniteObjective,
  ZeroCode,
  BadSpec,
  EmptySplit,
  ParseError,
  SchemaError,
  IoError,
  LengthMismatch,
  LabelOutOfRange,
  InsufficientGroups,
  EmptyMeasurement,
  BadModel,
};

std::string_view to_string(ErrorKind kind);

/// True for kinds that stem from bad configuration rather than bad data.
bool is_config_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dlroc
