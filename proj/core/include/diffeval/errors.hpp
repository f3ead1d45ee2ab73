#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace diffeval {

/// A modelling assumption required by an operation does not hold.
/// `assumption()` names it (for example "A1 unichain" or "A4 nonconstant features").
class AssumptionViolation : public std::runtime_error {
 public:
  AssumptionViolation(std::string assumption, const std::string& what)
      : std::runtime_error(assumption + ": " + what), assumption_(std::move(assumption)) {}

  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

/// Input shapes or values are inconsistent.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A learner produced NaN or Inf.
class NonFiniteError : public NumericalError {
 public:
  NonFiniteError(std::string algorithm, std::int64_t step)
      : NumericalError(algorithm + ": non-finite iterate at step " + std::to_string(step)),
        algorithm_(std::move(algorithm)),
        step_(step) {}

  const std::string& algorithm() const noexcept { return algorithm_; }
  std::int64_t step() const noexcept { return step_; }

 private:
  std::string algorithm_;
  std::int64_t step_;
};

}  // namespace diffeval
