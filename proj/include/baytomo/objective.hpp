#pragma once

#include <cstddef>
#include <span>

#include "baytomo/geometry.hpp"
#include "baytomo/priors.hpp"
#include "baytomo/target.hpp"

namespace baytomo {

/// Negative log posterior: likelihood_neglog(A, y, x) + prior.energy(x).
/// Holds references; A, y and the prior must outlive it.
class PosteriorObjective final : public SmoothTarget {
 public:
  PosteriorObjective(const SparseOperator& A, const Sinogram& y, const PriorModel& prior);

  std::size_t dimension() const override { return A_.pixels(); }
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const override;

  std::size_t evaluations() const { return evaluations_; }
  const SparseOperator& op() const { return A_; }
  const Sinogram& sinogram() const { return y_; }
  const PriorModel& prior() const { return prior_; }

 private:
  const SparseOperator& A_;
  const Sinogram& y_;
  const PriorModel& prior_;
  mutable std::size_t evaluations_ = 0;
};

}  // namespace baytomo
