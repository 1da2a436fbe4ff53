#include "baytomo/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace baytomo {

ResidualCache::ResidualCache(const SparseOperator& A, const Sinogram& y, std::span<const double> x)
    : A_(A), y_(y), r_(A.rays()), inv_two_var_(0.5 / (y.noise_sigma * y.noise_sigma)) {
  if (y.values.size() != A.rays()) throw std::invalid_argument("sinogram length does not match the operator");
  if (x.size() != A.pixels()) throw std::invalid_argument("state length does not match the operator");
  apply_into(A_, x, r_);
  for (std::size_t i = 0; i < r_.size(); ++i) r_[i] = y_.values[i] - r_[i];
}

double ResidualCache::delta(std::size_t k, double delta) const {
  const auto rows = A_.column_rows(k);
  const auto vals = A_.column_values(k);
  double dot = 0.0;
  for (std::size_t e = 0; e < rows.size(); ++e) dot += vals[e] * r_[rows[e]];
  return (-2.0 * delta * dot + delta * delta * A_.column_norm_squared(k)) * inv_two_var_;
}

void ResidualCache::accept(std::size_t k, double delta) {
  const auto rows = A_.column_rows(k);
  const auto vals = A_.column_values(k);
  for (std::size_t e = 0; e < rows.size(); ++e) r_[rows[e]] -= delta * vals[e];
}

double ResidualCache::refresh(std::span<const double> x) {
  std::vector<double> fresh(A_.rays());
  apply_into(A_, x, fresh);
  double drift = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    fresh[i] = y_.values[i] - fresh[i];
    drift = std::max(drift, std::abs(fresh[i] - r_[i]));
  }
  if (drift > drift_tolerance) ++stale_;
  max_drift_ = std::max(max_drift_, drift);
  r_ = std::move(fresh);
  return drift;
}

double ResidualCache::value() const {
  double s = 0.0;
  for (double v : r_) s += v * v;
  return s * inv_two_var_;
}

TomographyComponentTarget::TomographyComponentTarget(const SparseOperator& A, const Sinogram& y,
                                                     const PriorModel& prior, std::span<const double> x0,
                                                     std::size_t refresh_interval)
    : A_(A),
      y_(y),
      prior_(prior),
      x_(x0.begin(), x0.end()),
      residual_(A, y, x0),
      prior_cache_(prior, x0),
      refresh_interval_(refresh_interval) {
  if (prior.shape().size() != A.pixels()) throw std::invalid_argument("prior grid does not match the operator");
  if (refresh_interval_ == 0) throw std::invalid_argument("refresh interval must be positive");
}

double TomographyComponentTarget::energy() const { return residual_.value() + prior_.energy(x_); }

double TomographyComponentTarget::delta_energy(std::size_t k, double new_value) {
  return residual_.delta(k, new_value - x_[k]) + prior_cache_.delta(x_, k, new_value);
}

void TomographyComponentTarget::accept(std::size_t k, double new_value) {
  const double old = x_[k];
  residual_.accept(k, new_value - old);
  prior_cache_.accept(k, old, new_value);
  x_[k] = new_value;
  if (++since_refresh_ >= refresh_interval_) {
    residual_.refresh(x_);
    prior_cache_.rebuild(x_);
    since_refresh_ = 0;
  }
}

double TomographyComponentTarget::suggested_std(std::size_t k) const {
  const double curvature = A_.column_norm_squared(k) / (y_.noise_sigma * y_.noise_sigma);
  if (!(curvature > 0.0)) return max_std_;
  return std::min(max_std_, 1.0 / std::sqrt(curvature));
}

}  // namespace baytomo
