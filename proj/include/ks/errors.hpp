#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ks {

/// Base class for every failure raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. `line` is 1-based; 0 when no single line is at fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string file, int line)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

/// Invalid scenario or scheme configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A linear solve failed (non-convergence or a singular factorization).
/// `step` is the time-step index being computed; `residual_history` holds the
/// relative residuals observed before giving up (one entry for direct solves).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int step, std::vector<double> residual_history)
      : Error("step " + std::to_string(step) + ": " + what),
        step_(step),
        residual_history_(std::move(residual_history)) {}

  int step() const { return step_; }
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  int step_;
  std::vector<double> residual_history_;
};

}  // namespace ks
