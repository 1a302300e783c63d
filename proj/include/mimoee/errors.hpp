#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mimoee {

/// Input violates a documented precondition (shape, sign, Hermitian-ness...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A channel or covariance that must be invertible is (numerically) singular.
class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method hit its iteration cap before meeting its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_delta, std::size_t iterations)
      : std::runtime_error(what), last_delta_(last_delta), iterations_(iterations) {}

  double last_delta() const noexcept { return last_delta_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double last_delta_;
  std::size_t iterations_;
};

}  // namespace mimoee
