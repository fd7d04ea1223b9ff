#pragma once

#include <stdexcept>
#include <string>

namespace sequnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Thrown when a sequence is too short for a kernel, a graph, or a stream.
class InsufficientLength : public ShapeError {
 public:
  InsufficientLength(long required, long actual, const std::string& what = "")
      : ShapeError("insufficient input length: need at least " + std::to_string(required) +
                   " frames, got " + std::to_string(actual) + (what.empty() ? "" : " (" + what + ")")),
        required_(required),
        actual_(actual) {}

  long required() const { return required_; }
  long actual() const { return actual_; }

 private:
  long required_;
  long actual_;
};

// Two sequences that should share a time grid do not. Usually a cropping bug.
class AlignmentError : public ShapeError {
 public:
  explicit AlignmentError(const std::string& detail) : ShapeError("temporal misalignment: " + detail) {}
};

class CropError : public ShapeError {
 public:
  CropError(long n, long length)
      : ShapeError("crop exceeds length: " + std::to_string(n) + " > " + std::to_string(length)) {}
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class StaleTape : public Error {
 public:
  StaleTape() : Error("stale tape: backward already ran on this tape") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sequnet
