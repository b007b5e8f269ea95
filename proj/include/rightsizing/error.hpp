#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rightsizing {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Array shapes disagree (schedule vs instance, trace files, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Problem data admits no feasible point, or a schedule violates demand or
// capacity. `slot` is 1-based, 0 when not slot specific.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::size_t slot = 0)
      : Error(what), slot_(slot) {}
  std::size_t slot() const noexcept { return slot_; }

 private:
  std::size_t slot_;
};

// Argument outside the domain of a cost function or an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap. `residual` is the worst
// residual observed at that point.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Malformed or inconsistent input data. `line` is 1-based, 0 if unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rightsizing
