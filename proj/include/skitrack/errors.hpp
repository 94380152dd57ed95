#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skitrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The localizer backend could not be reached or did not answer in time.
class LocalizerUnavailable : public Error {
 public:
  explicit LocalizerUnavailable(const std::string& detail)
      : Error("localizer unavailable: " + detail) {}
};

/// The localizer answered with something that breaks the wire contract.
class ProtocolViolation : public Error {
 public:
  explicit ProtocolViolation(const std::string& detail)
      : Error("protocol violation: " + detail) {}
};

class TrackingError : public Error {
 public:
  TrackingError(std::size_t frame, const std::string& detail)
      : Error("frame " + std::to_string(frame) + ": " + detail), frame_(frame) {}

  std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public DatasetError {
 public:
  ParseError(std::size_t line, const std::string& detail)
      : DatasetError("line " + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace skitrack
