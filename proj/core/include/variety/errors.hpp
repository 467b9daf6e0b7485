#pragma once

#include <stdexcept>
#include <string>

namespace variety {

// Shapes or values that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Too few samples for the requested model: s < N - q.
class AssumptionViolation : public std::runtime_error {
 public:
  AssumptionViolation(const std::string& what, long required_samples)
      : std::runtime_error(what), required_samples_(required_samples) {}

  long required_samples() const noexcept { return required_samples_; }

 private:
  long required_samples_;
};

// Malformed CSV/JSON input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace variety
