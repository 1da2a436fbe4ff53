#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "baytomo/target.hpp"

namespace baytomo {

struct WolfeParams {
  double c1 = 1e-4;
  double c2 = 0.9;
};

/// supplied starts from the x0 argument; zero ignores its values.
enum class InitialPoint { supplied, zero };

struct LbfgsConfig {
  std::size_t memory = 10;
  std::size_t max_iterations = 2000;
  /// Stop once ||grad||_inf <= grad_tol * max(||grad(x0)||_inf, 1) when
  /// relative_tolerance is set, else <= grad_tol.
  double grad_tol = 1e-6;
  bool relative_tolerance = true;
  WolfeParams line_search;
  std::size_t max_line_search_evaluations = 40;
  InitialPoint initial_point = InitialPoint::supplied;

  void validate() const;
};

enum class LbfgsStatus { converged, max_iterations, line_search_failed };

std::string to_string(LbfgsStatus status);

struct LbfgsReport {
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double final_grad_inf_norm = 0.0;
  double final_value = 0.0;
  /// f after x0 and after every accepted step.
  std::vector<double> objective_trace;

  bool converged() const { return status == LbfgsStatus::converged; }
};

struct LbfgsResult {
  std::vector<double> x;
  LbfgsReport report;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + zoom
/// with cubic interpolation). On line-search failure the best iterate is
/// returned with status line_search_failed.
LbfgsResult lbfgs_minimize(const SmoothTarget& f, const LbfgsConfig& cfg, std::span<const double> x0);

}  // namespace baytomo
