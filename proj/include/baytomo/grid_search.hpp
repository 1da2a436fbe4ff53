#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "baytomo/geometry.hpp"
#include "baytomo/lbfgs.hpp"
#include "baytomo/priors.hpp"

namespace baytomo {

struct GridSearchSpec {
  std::string parameter;
  std::vector<double> candidates;
  /// Ground truth the MAP estimates are scored against.
  std::vector<double> truth;

  void validate() const;
};

struct GridSearchRow {
  double candidate = 0.0;
  double relative_error = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Empty unless the optimizer threw for this candidate.
  std::string failure;
};

struct GridSearchResult {
  std::size_t best_index = 0;
  double best_candidate = 0.0;
  std::vector<GridSearchRow> table;
  /// MAP estimate of the best candidate.
  std::vector<double> best_estimate;
};

/// Builds the prior for one candidate value.
using PriorFactory = std::function<PriorModel(double candidate)>;

double relative_l2_error(std::span<const double> estimate, std::span<const double> truth);

/// n values log-spaced on [lo, hi] inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// Runs one MAP optimization per candidate (in parallel) and picks the
/// candidate with the smallest relative L2 error to the truth. A candidate
/// whose optimization throws is recorded with infinite error.
GridSearchResult grid_search(const GridSearchSpec& spec, const SparseOperator& A, const Sinogram& y,
                             const PriorFactory& make_prior, const LbfgsConfig& cfg);

/// CSV columns: candidate,relative_l2_error,iterations,converged
void write_error_table_csv(std::ostream& out, const GridSearchResult& result);

}  // namespace baytomo
