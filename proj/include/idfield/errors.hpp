#pragma once

#include <stdexcept>
#include <string>

namespace idfield {

// Caller supplied something outside an operation's contract.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not reach the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double estimate, double achieved)
      : std::runtime_error(what), estimate_(estimate), achieved_(achieved) {}

  // Best value found before giving up.
  double estimate() const noexcept { return estimate_; }
  // Error estimate attached to that value.
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double estimate_;
  double achieved_;
};

}  // namespace idfield
