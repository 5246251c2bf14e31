#pragma once

#include <stdexcept>
#include <string>

namespace i2l {

// Caller broke an operation's shape or argument contract.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A required prior state is missing (empty buffer, missing snapshots,
// state-only demo where actions are needed, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A loss, action or parameter became non-finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double value)
      : std::runtime_error(what + " (value=" + std::to_string(value) + ")"), value_(value) {}

  double value() const { return value_; }

 private:
  double value_;
};

}  // namespace i2l
