#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "baytomo/accumulator.hpp"
#include "baytomo/diagnostics.hpp"

namespace baytomo {

/// Energy with cheap single-component deltas. The target owns the current
/// state; the sampler only proposes and commits.
class ComponentTarget {
 public:
  virtual ~ComponentTarget() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::span<const double> state() const = 0;
  /// Full energy at the current state.
  virtual double energy() const = 0;
  /// energy(state with x_k = new_value) - energy(state).
  virtual double delta_energy(std::size_t k, double new_value) = 0;
  virtual void accept(std::size_t k, double new_value) = 0;
  /// Proposal scale used before adaptation has any history.
  virtual double suggested_std(std::size_t /*k*/) const { return 1.0; }
};

struct MwgConfig {
  std::size_t n_adapt = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double scale = 2.4;
  /// Added to every adapted std so a component can never freeze.
  double epsilon_floor = 1e-8;
  /// Sweeps run on the initial std before the running variance takes over.
  std::size_t adapt_start = 10;
  /// Empty: ask the target.
  std::vector<double> initial_std;
  bool random_order = false;
  /// Batch length for the Monte Carlo error; 0 picks n_samples / 50.
  std::size_t batch_size = 0;
  std::size_t reservoir_stride = 0;
  /// Trace every k-th sweep (the last sweep is always traced).
  std::size_t diagnostics_every = 1;

  void validate() const;
};

struct MwgResult {
  ChainAccumulator samples;
  std::vector<DiagnosticRow> diagnostics;
  /// Frozen proposal std per component.
  std::vector<double> proposal_std;
  /// Post-adaptation acceptance rate per component.
  std::vector<double> acceptance;
  double mean_acceptance = 0.0;
  std::vector<double> final_state;
};

/// Single-component adaptive Metropolis-within-Gibbs. Each sweep visits every
/// component once (raster order unless random_order) with a Gaussian random
/// walk proposal. During the first n_adapt sweeps the std of component k is
/// scale * sqrt(running variance of x_k) + epsilon_floor; afterwards it is
/// frozen and only the n_samples post-adaptation sweeps are accumulated.
MwgResult mwg_run(ComponentTarget& target, const MwgConfig& cfg, const SampleSink& sink = {});

}  // namespace baytomo
