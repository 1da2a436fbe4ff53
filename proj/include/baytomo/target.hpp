#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace baytomo {

/// Raised when an energy or gradient stops being finite where it must be.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A differentiable energy f(x) (a negative log density up to a constant).
class SmoothTarget {
 public:
  virtual ~SmoothTarget() = default;
  virtual std::size_t dimension() const = 0;
  /// Returns f(x) and overwrites grad with its gradient at the same x.
  virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) const = 0;
};

}  // namespace baytomo
