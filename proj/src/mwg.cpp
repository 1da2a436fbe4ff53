#include "baytomo/mwg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "baytomo/rng.hpp"
#include "baytomo/target.hpp"

namespace baytomo {

void MwgConfig::validate() const {
  if (n_samples == 0) throw std::invalid_argument("mwg needs at least one post-adaptation sample");
  if (!(scale > 0.0)) throw std::invalid_argument("mwg scale must be positive");
  if (!(epsilon_floor > 0.0)) throw std::invalid_argument("mwg epsilon_floor must be positive");
  for (double s : initial_std) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("mwg initial std must be positive");
  }
  if (diagnostics_every == 0) throw std::invalid_argument("diagnostics_every must be positive");
}

MwgResult mwg_run(ComponentTarget& target, const MwgConfig& cfg, const SampleSink& sink) {
  cfg.validate();
  const std::size_t m = target.dimension();
  if (!cfg.initial_std.empty() && cfg.initial_std.size() != m) {
    throw std::invalid_argument("mwg initial std has the wrong length");
  }
  for (double v : target.state()) {
    if (!std::isfinite(v)) throw NumericalError("mwg: initial state is not finite");
  }
  double energy = target.energy();
  if (!std::isfinite(energy)) throw NumericalError("mwg: energy at the initial state is not finite");

  std::vector<double> std_dev(m);
  for (std::size_t k = 0; k < m; ++k) std_dev[k] = cfg.initial_std.empty() ? target.suggested_std(k) : cfg.initial_std[k];

  const std::size_t batch = cfg.batch_size > 0 ? cfg.batch_size : std::max<std::size_t>(1, cfg.n_samples / 50);
  MwgResult result{ChainAccumulator(m, batch, cfg.reservoir_stride), {}, {}, {}, 0.0, {}};
  ChainAccumulator history(m);
  std::vector<std::size_t> accepted(m, 0);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Rng rng(cfg.seed);
  const std::size_t total = cfg.n_adapt + cfg.n_samples;
  for (std::size_t sweep = 0; sweep < total; ++sweep) {
    const bool adapting = sweep < cfg.n_adapt;
    if (cfg.random_order) {
      for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::size_t sweep_accepts = 0;
    for (std::size_t k : order) {
      const double current = target.state()[k];
      const double proposal = current + std_dev[k] * rng.normal();
      const double delta = target.delta_energy(k, proposal);
      const double log_u = std::log(rng.uniform_open());
      if (std::isfinite(delta) && log_u < -delta) {
        target.accept(k, proposal);
        energy += delta;
        ++sweep_accepts;
        if (!adapting) ++accepted[k];
      }
    }

    if (adapting) {
      history.add(target.state());
      if (sweep + 1 >= cfg.adapt_start && history.count() >= 2) {
        const auto m2 = history.m2();
        const double denom = static_cast<double>(history.count() - 1);
        for (std::size_t k = 0; k < m; ++k) std_dev[k] = cfg.scale * std::sqrt(m2[k] / denom) + cfg.epsilon_floor;
      }
    } else {
      result.samples.add(target.state());
      if (sink) sink(sweep - cfg.n_adapt, target.state());
    }

    if ((sweep + 1) % cfg.diagnostics_every == 0 || sweep + 1 == total) {
      DiagnosticRow row;
      row.iteration = sweep;
      row.energy = energy;
      row.step = std::accumulate(std_dev.begin(), std_dev.end(), 0.0) / static_cast<double>(m);
      row.accept_stat = static_cast<double>(sweep_accepts) / static_cast<double>(m);
      row.adapting = adapting;
      result.diagnostics.push_back(row);
    }
  }

  result.proposal_std = std_dev;
  result.acceptance.resize(m);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    result.acceptance[k] = static_cast<double>(accepted[k]) / static_cast<double>(cfg.n_samples);
    sum += result.acceptance[k];
  }
  result.mean_acceptance = sum / static_cast<double>(m);
  result.final_state.assign(target.state().begin(), target.state().end());
  return result;
}

}  // namespace baytomo
