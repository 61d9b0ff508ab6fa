#pragma once

#include <stdexcept>
#include <string>

namespace rtm {

// Invalid model or estimator parameter (negative variance, R outside (0,1], NaN...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fewer subjects than an operation needs.
class SampleSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A column without spread where a variance is divided by.
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blomqvist correction with delta2 >= observed pre-test variance.
class SingularityError : public std::runtime_error {
 public:
  SingularityError() : std::runtime_error("estimated signal variance non-positive") {}
  explicit SingularityError(const std::string& detail)
      : std::runtime_error("estimated signal variance non-positive: " + detail) {}
};

// Resampling produced no usable replicate.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called with an incompatible combination of arguments.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable input data.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtm
