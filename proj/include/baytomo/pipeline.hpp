#pragma once

#include <optional>
#include <ostream>

#include "baytomo/config.hpp"
#include "baytomo/geometry.hpp"
#include "baytomo/grid.hpp"
#include "baytomo/lbfgs.hpp"
#include "baytomo/priors.hpp"

namespace baytomo {

/// Everything an estimator needs: the grid, the measurement geometry and
/// operator, the data, and the truth when it is known.
struct Problem {
  GridShape shape;
  ProjectionGeometry geometry;
  SparseOperator A;
  Sinogram y;
  std::optional<ImageGrid> truth;
};

/// Truth image named by the config: input.truth if set, else the phantom
/// (slice slice_index of slices).
ImageGrid config_truth(const RunConfig& cfg);
/// Simulates from config_truth, or reads input.sinogram (plus input.truth
/// when given) when set.
Problem build_problem(const RunConfig& cfg);

/// max(y) / min(grid width, grid height): the attenuation scale implied by
/// the data.
double dynamic_range_estimate(const Problem& problem);
/// The configured beta, or the default derived from the dynamic range.
double resolve_smoothing_beta(const RunConfig& cfg, const Problem& problem);
/// The configured prior; TV and Besov carry smoothing_beta.
PriorModel configured_prior(const RunConfig& cfg, const GridShape& shape, double smoothing_beta);
LbfgsConfig configured_lbfgs(const RunConfig& cfg);
/// The parameter a grid search varies by default for each prior.
std::string default_search_parameter(const std::string& prior_name);

// Commands. Each writes its artifacts plus run.lock into cfg.output and a
// short report to `log`; the config is updated with every value resolved
// during the run before the lock is written.
void run_simulate(RunConfig& cfg, std::ostream& log);
void run_reconstruct(RunConfig& cfg, std::ostream& log);
void run_gridsearch(RunConfig& cfg, std::ostream& log);
void run_stack(RunConfig& cfg, std::ostream& log);

}  // namespace baytomo
