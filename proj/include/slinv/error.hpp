#pragma once

#include <stdexcept>
#include <string>

namespace slinv {

// Bad inputs: grid mismatch, h1 == h2, malformed targets or configs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Forward solve did not converge or produced non-finite data.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int index = -1, double lo = 0.0, double hi = 0.0)
      : std::runtime_error(what), index_(index), lo_(lo), hi_(hi) {}

  int index() const noexcept { return index_; }
  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  int index_;
  double lo_, hi_;
};

// Line search found no decrease within its evaluation budget.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double last_alpha)
      : std::runtime_error(what), last_alpha_(last_alpha) {}

  double last_alpha() const noexcept { return last_alpha_; }

 private:
  double last_alpha_;
};

}  // namespace slinv
