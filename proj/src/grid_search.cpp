#include "baytomo/grid_search.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "baytomo/io.hpp"
#include "baytomo/objective.hpp"

namespace baytomo {

void GridSearchSpec::validate() const {
  if (candidates.empty()) throw std::invalid_argument("grid search needs at least one candidate");
  for (double c : candidates) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("grid search candidates must be positive");
  }
  if (truth.empty()) throw std::invalid_argument("grid search needs a truth image");
}

double relative_l2_error(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("relative_l2_error: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    num += (estimate[k] - truth[k]) * (estimate[k] - truth[k]);
    den += truth[k] * truth[k];
  }
  if (den == 0.0) throw std::invalid_argument("relative_l2_error: truth is identically zero");
  return std::sqrt(num / den);
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw std::invalid_argument("log_spaced needs 0 < lo <= hi and n > 0");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

GridSearchResult grid_search(const GridSearchSpec& spec, const SparseOperator& A, const Sinogram& y,
                             const PriorFactory& make_prior, const LbfgsConfig& cfg) {
  spec.validate();
  if (spec.truth.size() != A.pixels()) throw std::invalid_argument("grid search truth does not match the operator");
  const auto n = static_cast<std::int64_t>(spec.candidates.size());
  GridSearchResult result;
  result.table.resize(spec.candidates.size());
  std::vector<std::vector<double>> estimates(spec.candidates.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < n; ++c) {
    auto& row = result.table[c];
    row.candidate = spec.candidates[c];
    try {
      const PriorModel prior = make_prior(row.candidate);
      const PosteriorObjective objective(A, y, prior);
      const std::vector<double> x0(A.pixels(), 0.0);
      auto map = lbfgs_minimize(objective, cfg, x0);
      row.relative_error = relative_l2_error(map.x, spec.truth);
      row.iterations = map.report.iterations;
      row.converged = map.report.converged();
      estimates[c] = std::move(map.x);
    } catch (const std::exception& e) {
      row.relative_error = std::numeric_limits<double>::infinity();
      row.failure = e.what();
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    if (result.table[c].relative_error < best) {
      best = result.table[c].relative_error;
      result.best_index = c;
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("grid search: every candidate failed");
  result.best_candidate = result.table[result.best_index].candidate;
  result.best_estimate = std::move(estimates[result.best_index]);
  return result;
}

void write_error_table_csv(std::ostream& out, const GridSearchResult& result) {
  out << "candidate,relative_l2_error,iterations,converged\n";
  for (const auto& row : result.table) {
    out << format_real(row.candidate) << ',' << format_real(row.relative_error) << ',' << row.iterations << ','
        << (row.converged ? 1 : 0) << '\n';
  }
}

}  // namespace baytomo
