#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

namespace baytomo {

/// One line of the per-chain trace. `step` is the leapfrog step size for
/// NUTS and the mean proposal std for MwG; tree_depth is 0 for MwG.
struct DiagnosticRow {
  std::size_t iteration = 0;
  double energy = 0.0;
  double step = 0.0;
  double accept_stat = 0.0;
  bool divergent = false;
  std::size_t tree_depth = 0;
  bool adapting = false;
};

/// Header: iteration,energy,step,accept_stat,divergent,tree_depth,adapting
void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows);

/// Called with every post-adaptation sample (iteration counted from 0).
using SampleSink = std::function<void(std::size_t iteration, std::span<const double> x)>;

}  // namespace baytomo
