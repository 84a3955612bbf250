#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sybiledge {

enum class ErrorCode {
  DuplicateEdge,
  SelfLoop,
  NodeOutOfRange,
  NonBinaryLabel,
  InvalidArgument,
  EmptyTrainingSet,
  UnknownNode,
  Overflow,
  Underflow,
  EmptySeedSet,
  DegenerateSequence,
  InsufficientTargets,
  SingleClass,
  ParseError,
  MissingKey,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; `code()` lets callers
// (the CLI in particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sybiledge
