#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "baytomo/geometry.hpp"
#include "baytomo/mwg.hpp"
#include "baytomo/priors.hpp"

namespace baytomo {

/// Residual r = y - A x kept in step with single-pixel changes of x, so a
/// likelihood delta touches only one column of A.
class ResidualCache {
 public:
  static constexpr double drift_tolerance = 1e-6;

  ResidualCache(const SparseOperator& A, const Sinogram& y, std::span<const double> x);

  /// Change of 0.5 * ||r||^2 / sigma^2 when x_k moves by delta.
  double delta(std::size_t k, double delta) const;
  /// r -= delta * A[:, k]
  void accept(std::size_t k, double delta);
  /// Recomputes r from scratch and returns the max abs difference to the
  /// cached copy. Drifts above drift_tolerance are counted as stale.
  double refresh(std::span<const double> x);

  std::span<const double> residual() const { return r_; }
  double value() const;
  std::size_t stale_refreshes() const { return stale_; }
  double max_drift() const { return max_drift_; }

 private:
  const SparseOperator& A_;
  const Sinogram& y_;
  std::vector<double> r_;
  double inv_two_var_;
  std::size_t stale_ = 0;
  double max_drift_ = 0.0;
};

/// Negative log posterior over the pixel values for MwG: exact prior deltas
/// plus residual-cached likelihood deltas. The residual is recomputed every
/// refresh_interval accepted moves.
class TomographyComponentTarget final : public ComponentTarget {
 public:
  TomographyComponentTarget(const SparseOperator& A, const Sinogram& y, const PriorModel& prior,
                            std::span<const double> x0, std::size_t refresh_interval = 100000);

  std::size_t dimension() const override { return x_.size(); }
  std::span<const double> state() const override { return x_; }
  double energy() const override;
  double delta_energy(std::size_t k, double new_value) override;
  void accept(std::size_t k, double new_value) override;
  /// Inverse square root of the likelihood curvature along pixel k, capped by
  /// max_std.
  double suggested_std(std::size_t k) const override;

  void set_max_std(double s) { max_std_ = s; }
  const ResidualCache& residual() const { return residual_; }

 private:
  const SparseOperator& A_;
  const Sinogram& y_;
  PriorModel prior_;
  std::vector<double> x_;
  ResidualCache residual_;
  PriorDeltaCache prior_cache_;
  std::size_t refresh_interval_;
  std::size_t since_refresh_ = 0;
  double max_std_ = 1.0;
};

}  // namespace baytomo
