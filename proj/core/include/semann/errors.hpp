#pragma once

#include <stdexcept>
#include <string>

namespace semann {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input table does not match the declared schema (missing column, bad cell).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Data is structurally valid but unusable (empty body, singular covariance).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied options are inconsistent with the data or with each other.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Model-description text failed to parse; carries the 1-based source line.
class ModelParseError : public Error {
 public:
  ModelParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Parsed model violates a structural constraint (cycle, duplicate item, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical operation left its domain (singular matrix, overflow).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Iterative estimation failed to converge; carries best-so-far diagnostics.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double best_f,
                   double grad_norm)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", f=" + std::to_string(best_f) +
              ", grad_norm=" + std::to_string(grad_norm) + ")"),
        iterations_(iterations),
        best_f_(best_f),
        grad_norm_(grad_norm) {}

  int iterations() const { return iterations_; }
  double best_f() const { return best_f_; }
  double grad_norm() const { return grad_norm_; }

 private:
  int iterations_;
  double best_f_;
  double grad_norm_;
};

}  // namespace semann
