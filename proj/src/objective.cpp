#include "baytomo/objective.hpp"

#include <stdexcept>
#include <vector>

namespace baytomo {

PosteriorObjective::PosteriorObjective(const SparseOperator& A, const Sinogram& y, const PriorModel& prior)
    : A_(A), y_(y), prior_(prior) {
  if (y.values.size() != A.rays()) throw std::invalid_argument("sinogram length does not match the operator");
  if (prior.shape().size() != A.pixels()) throw std::invalid_argument("prior grid does not match the operator");
  if (y.geometry_digest != 0 && A.digest() != 0 && y.geometry_digest != A.digest()) {
    throw std::invalid_argument("sinogram was produced by a different geometry");
  }
  if (!(y.noise_sigma > 0.0)) throw std::invalid_argument("noise sigma must be positive");
}

double PosteriorObjective::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  ++evaluations_;
  const double like = likelihood_value_and_gradient(A_, y_, x, grad);
  std::vector<double> prior_grad(grad.size());
  const double pri = prior_.energy_and_gradient(x, prior_grad);
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += prior_grad[k];
  return like + pri;
}

}  // namespace baytomo
