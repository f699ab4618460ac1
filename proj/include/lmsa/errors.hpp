#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmsa {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an evaluator the operation needs (e.g. grad_laplacian) is absent.
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

// Step size at or above the linear stability limit 2/L of a quadratic target.
struct StabilityError : std::domain_error {
  using std::domain_error::domain_error;
};

// Step size outside the range where a bound is certified (h > h1).
struct OutOfCertifiedRange : std::domain_error {
  using std::domain_error::domain_error;
};

struct NotReached : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A chain produced a non-finite coordinate.
class NumericalDivergence : public std::runtime_error {
 public:
  NumericalDivergence(std::size_t replica, std::size_t step)
      : std::runtime_error("numerical divergence in replica " + std::to_string(replica) +
                           " at step " + std::to_string(step)),
        replica_(replica),
        step_(step) {}

  std::size_t replica() const noexcept { return replica_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t replica_;
  std::size_t step_;
};

}  // namespace lmsa
