#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xdrs {

enum class ErrorKind {
  EmptyInput,
  UnboundVariable,
  UnknownOperator,
  CyclicStructure,
  InvalidDrs,
  AmbiguousMerge,
  MalformedSequence,
  MalformedTree,
  MalformedConllu,
  DimensionMismatch,
  PairingError,
  ShapeError,
  UnsupportedFeatureCombination,
  TruncatedOutput,
  InternalContractViolation,
  ConfigError,
  NumericError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Exit code for the command-line front end: 2 config, 3 data, 4 numeric.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace xdrs
