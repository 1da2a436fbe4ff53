#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "baytomo/accumulator.hpp"
#include "baytomo/diagnostics.hpp"
#include "baytomo/rng.hpp"
#include "baytomo/target.hpp"

namespace baytomo {

/// L leapfrog steps of size eps for H = U(x) + 0.5 p' M^-1 p. On entry grad
/// must hold grad U(x); x, p and grad are updated in place. Returns U at the
/// final position, or NaN (and stops early) once U or its gradient is not
/// finite.
double leapfrog(const SmoothTarget& potential, std::span<double> x, std::span<double> p, std::span<double> grad,
                double eps, std::span<const double> inv_mass, std::size_t steps);

/// 0.5 p' M^-1 p
double kinetic_energy(std::span<const double> p, std::span<const double> inv_mass);

/// Step-size adaptation by dual averaging toward a target acceptance statistic.
class DualAveraging {
 public:
  DualAveraging(double initial_step, double target_accept, double gamma = 0.05, double t0 = 10.0,
                double kappa = 0.75);

  /// Feeds one acceptance statistic and returns the next step size.
  double update(double accept_stat);
  /// exp(log of the averaged step); the value to freeze after adaptation.
  double final_step() const;

  double mu() const { return mu_; }
  std::size_t iterations() const { return m_; }

 private:
  double mu_, target_, gamma_, t0_, kappa_;
  double h_bar_ = 0.0;
  double log_eps_bar_ = 0.0;
  std::size_t m_ = 0;
};

/// Doubling/halving search for a step whose one-step acceptance probability
/// crosses 0.5, starting from `start`.
double find_reasonable_step_size(const SmoothTarget& potential, std::span<const double> x,
                                 std::span<const double> inv_mass, Rng& rng, double start = 1.0);

struct NutsConfig {
  std::size_t n_adapt = 100;
  std::size_t n_samples = 400;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;
  std::size_t max_depth = 10;
  double divergence_threshold = 1000.0;
  /// 0: choose by find_reasonable_step_size.
  double initial_step = 0.0;
  /// Diagonal of M^-1; empty means identity.
  std::vector<double> inv_mass;
  /// Batch length for the Monte Carlo error; 0 picks n_samples / 50.
  std::size_t batch_size = 0;
  std::size_t reservoir_stride = 0;

  void validate() const;
};

struct NutsResult {
  ChainAccumulator samples;
  std::vector<DiagnosticRow> diagnostics;
  double step_size = 0.0;
  double initial_step = 0.0;
  /// Mean acceptance statistic over post-adaptation iterations.
  double mean_accept_stat = 0.0;
  std::size_t divergences = 0;
  double divergence_rate = 0.0;
  std::size_t gradient_evaluations = 0;
  std::vector<double> final_state;
  /// Non-empty when post-adaptation divergences exceed 10%.
  std::string warning;
};

/// No-U-turn sampler with multinomial trajectory sampling. Each iteration
/// draws p ~ N(0, M) and doubles the trajectory in a random direction until
/// the endpoints turn back on each other, a subtree diverges, or max_depth
/// is reached. The first n_adapt iterations tune the step size by dual
/// averaging; afterwards it is frozen and the n_samples draws are
/// accumulated.
NutsResult nuts_run(const SmoothTarget& potential, std::span<const double> x0, const NutsConfig& cfg,
                    const SampleSink& sink = {});

}  // namespace baytomo
