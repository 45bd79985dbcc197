#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace esm {

// Raised when an input violates one of the model's standing assumptions:
// market feasibility, per-prosumer self-sufficiency feasibility, profitable
// standalone operation, or the market-sensitivity convergence threshold.
// Carries the offending prosumer ids when the violation is per-prosumer.
class AssumptionViolation : public std::runtime_error {
 public:
  AssumptionViolation(std::string assumption, std::vector<int> prosumer_ids,
                      const std::string& message)
      : std::runtime_error(message),
        assumption_(std::move(assumption)),
        prosumer_ids_(std::move(prosumer_ids)) {}

  const std::string& assumption() const { return assumption_; }
  const std::vector<int>& prosumer_ids() const { return prosumer_ids_; }

 private:
  std::string assumption_;
  std::vector<int> prosumer_ids_;
};

// Invalid argument to a solver or builder (non-positive sensitivity, too few
// prosumers, malformed grid, bad configuration value, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A scalar bisection was handed a bracket without a sign change. Carries the
// residual at both ends so the caller can see which side failed.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& message, double lo_value, double hi_value)
      : std::runtime_error(message), lo_value_(lo_value), hi_value_(hi_value) {}

  double lo_value() const { return lo_value_; }
  double hi_value() const { return hi_value_; }

 private:
  double lo_value_;
  double hi_value_;
};

// Inputs that are individually valid but mutually inconsistent, e.g. bid
// recovery from an unbalanced allocation.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace esm
