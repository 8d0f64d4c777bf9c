#pragma once

#include <stdexcept>
#include <string>

namespace ctrac {

enum class ErrorKind {
  DomainError,
  ParseError,
  BadChart,
  ScaleMismatch,
  MissingMu,
  NotEinstein,
  UnsupportedValence,
  StepFailure,
  NotAlmostEinstein,
  NotParallel,
  GridTooCoarse,
  RankUnstable,
  NotOrthogonal,
  LinearlyDependent,
  NotConformalKilling,
  NotAZero,
  NotEinsteinFactor,
  ScalarMismatch,
  BadInterval,
  UnknownFixture,
  SingularLevelSet,
  IoError,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace ctrac
