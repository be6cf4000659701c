#pragma once

#include <stdexcept>
#include <string>

namespace roomtherm {

/// Base of every error thrown by the library. The CLI maps the subclasses
/// onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid specs, misaligned series.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A pipeline stage could not produce its result (no plane, no floor, ...).
class StageError : public Error {
 public:
  using Error::Error;
};

class NoPlaneFound : public StageError {
 public:
  using StageError::StageError;
};

class GeometryError : public StageError {
 public:
  using StageError::StageError;
};

class SimulationFault : public StageError {
 public:
  SimulationFault(std::size_t step, const std::string& what)
      : StageError("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace roomtherm
