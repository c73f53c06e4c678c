#pragma once

#include <stdexcept>
#include <string>

namespace zel {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Branch continuation of log zeta could not step past a point where |zeta|
// is (numerically) zero or where the argument winds faster than the step
// control can resolve.
class NearZeroOnPath : public std::runtime_error {
 public:
  NearZeroOnPath(double sigma, double t)
      : std::runtime_error("near-zero-on-path at sigma~" + std::to_string(sigma) +
                           ", t=" + std::to_string(t)),
        sigma_(sigma),
        t_(t) {}

  double sigma() const noexcept { return sigma_; }
  double t() const noexcept { return t_; }

 private:
  double sigma_;
  double t_;
};

// Enumeration or memory budget exceeded.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root finder could not bracket a solution.
class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zel
