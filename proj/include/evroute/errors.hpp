#pragma once

#include <stdexcept>
#include <string>

namespace evroute {

// Every error raised by the library derives from Error and carries a stable
// name so front ends can report the error class without RTTI games.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Malformed instance document.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

/// Well-formed instance that violates a model invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

/// No energy-feasible plan exists.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error("InfeasibleError", what) {}
};

/// A negative-weight cycle lies on some origin-destination walk.
class NegativeCycleError : public Error {
 public:
  explicit NegativeCycleError(const std::string& what) : Error("NegativeCycleError", what) {}
};

/// A configured enumeration cap (paths, compositions) would be exceeded.
class LimitExceededError : public Error {
 public:
  explicit LimitExceededError(const std::string& what) : Error("LimitExceededError", what) {}
};

/// Invalid argument to a solver (bad path, inconsistent assignment, ...).
class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what) : Error("InvalidArgumentError", what) {}
};

}  // namespace evroute
