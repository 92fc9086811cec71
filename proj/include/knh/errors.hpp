#pragma once

#include <stdexcept>
#include <string>

namespace knh {

enum class ErrorKind {
  Validation,
  Rank,
  Parse,
  Convergence,
  Capacity,
  Singularity,
  DegenerateFlat,
};

/// Base class for every error raised by the library. The kind drives the
/// CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class RankError : public Error {
 public:
  explicit RankError(const std::string& what) : Error(ErrorKind::Rank, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::Convergence, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ErrorKind::Capacity, what) {}
};

class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& what)
      : Error(ErrorKind::Singularity, what) {}
};

class DegenerateFlatError : public Error {
 public:
  explicit DegenerateFlatError(const std::string& what)
      : Error(ErrorKind::DegenerateFlat, what) {}
};

/// Process exit code for an error kind. 0 is reserved for success.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Rank: return 2;
    case ErrorKind::Parse: return 3;
    case ErrorKind::Convergence: return 4;
    case ErrorKind::Capacity: return 5;
    case ErrorKind::Singularity: return 6;
    case ErrorKind::DegenerateFlat: return 7;
  }
  return 1;
}

}  // namespace knh
