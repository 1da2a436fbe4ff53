#include "baytomo/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace baytomo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double inv_mass_at(std::span<const double> inv_mass, std::size_t k) { return inv_mass.empty() ? 1.0 : inv_mass[k]; }

bool all_finite(std::span<const double> v) {
  for (double a : v) {
    if (!std::isfinite(a)) return false;
  }
  return true;
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

void draw_momentum(std::span<double> p, std::span<const double> inv_mass, Rng& rng) {
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = rng.normal() / std::sqrt(inv_mass_at(inv_mass, k));
}

}  // namespace

double kinetic_energy(std::span<const double> p, std::span<const double> inv_mass) {
  double k = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) k += p[i] * p[i] * inv_mass_at(inv_mass, i);
  return 0.5 * k;
}

double leapfrog(const SmoothTarget& potential, std::span<double> x, std::span<double> p, std::span<double> grad,
                double eps, std::span<const double> inv_mass, std::size_t steps) {
  if (!(eps != 0.0) || !std::isfinite(eps)) throw std::invalid_argument("leapfrog step size must be finite and nonzero");
  if (x.size() != p.size() || x.size() != grad.size() || (!inv_mass.empty() && inv_mass.size() != x.size())) {
    throw std::invalid_argument("leapfrog: dimension mismatch");
  }
  double u = kNaN;
  const double half = 0.5 * eps;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t k = 0; k < x.size(); ++k) p[k] -= half * grad[k];
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += eps * inv_mass_at(inv_mass, k) * p[k];
    u = potential.value_and_gradient(x, grad);
    if (!std::isfinite(u) || !all_finite(grad)) return kNaN;
    for (std::size_t k = 0; k < x.size(); ++k) p[k] -= half * grad[k];
  }
  return u;
}

DualAveraging::DualAveraging(double initial_step, double target_accept, double gamma, double t0, double kappa)
    : mu_(std::log(10.0 * initial_step)), target_(target_accept), gamma_(gamma), t0_(t0), kappa_(kappa) {
  if (!(initial_step > 0.0)) throw std::invalid_argument("dual averaging needs a positive initial step");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw std::invalid_argument("target_accept must be in (0, 1)");
}

double DualAveraging::update(double accept_stat) {
  ++m_;
  const double m = static_cast<double>(m_);
  const double eta = 1.0 / (m + t0_);
  h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_stat);
  const double log_eps = mu_ - std::sqrt(m) / gamma_ * h_bar_;
  const double w = std::pow(m, -kappa_);
  log_eps_bar_ = w * log_eps + (1.0 - w) * log_eps_bar_;
  return std::exp(log_eps);
}

double DualAveraging::final_step() const { return std::exp(log_eps_bar_); }

double find_reasonable_step_size(const SmoothTarget& potential, std::span<const double> x,
                                 std::span<const double> inv_mass, Rng& rng, double start) {
  const std::size_t m = x.size();
  std::vector<double> g0(m), p0(m);
  const double u0 = potential.value_and_gradient(x, g0);
  if (!std::isfinite(u0)) throw NumericalError("step size search: energy is not finite at the start point");
  draw_momentum(p0, inv_mass, rng);
  const double h0 = u0 + kinetic_energy(p0, inv_mass);

  auto log_ratio = [&](double eps) {
    std::vector<double> xs(x.begin(), x.end()), ps = p0, gs = g0;
    const double u = leapfrog(potential, xs, ps, gs, eps, inv_mass, 1);
    const double h = u + kinetic_energy(ps, inv_mass);
    return std::isfinite(h) ? h0 - h : -std::numeric_limits<double>::infinity();
  };

  double eps = start;
  double lr = log_ratio(eps);
  const double dir = lr > std::log(0.5) ? 1.0 : -1.0;
  for (int i = 0; i < 200; ++i) {
    if (!(dir * lr > -dir * std::log(2.0))) break;
    const double next = eps * std::pow(2.0, dir);
    if (next < 1e-300 || next > 1e300) break;
    eps = next;
    lr = log_ratio(eps);
  }
  return eps;
}

void NutsConfig::validate() const {
  if (n_samples == 0) throw std::invalid_argument("nuts needs at least one post-adaptation sample");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw std::invalid_argument("target_accept must be in (0, 1)");
  if (!(gamma > 0.0) || !(t0 >= 0.0) || !(kappa > 0.0 && kappa <= 1.0)) {
    throw std::invalid_argument("invalid dual averaging constants");
  }
  if (max_depth == 0) throw std::invalid_argument("max tree depth must be positive");
  if (!(divergence_threshold > 0.0)) throw std::invalid_argument("divergence threshold must be positive");
  if (initial_step < 0.0 || !std::isfinite(initial_step)) throw std::invalid_argument("initial step must be >= 0");
  for (double v : inv_mass) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("inverse mass entries must be positive");
  }
}

namespace {

struct Point {
  std::vector<double> x, p, g;
  double u = 0.0;
};

struct Subtree {
  Point minus, plus;
  std::vector<double> x_prop;
  double u_prop = 0.0;
  double log_weight = -std::numeric_limits<double>::infinity();
  bool valid = true;
  bool divergent = false;
  double sum_accept = 0.0;
  std::size_t n_leapfrog = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const SmoothTarget& potential, std::span<const double> inv_mass, double eps, double h0,
              double threshold, Rng& rng)
      : potential_(potential), inv_mass_(inv_mass), eps_(eps), h0_(h0), threshold_(threshold), rng_(rng) {}

  bool turned(const Point& minus, const Point& plus) const {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < minus.x.size(); ++k) {
      const double dx = plus.x[k] - minus.x[k];
      const double w = inv_mass_at(inv_mass_, k);
      a += dx * w * minus.p[k];
      b += dx * w * plus.p[k];
    }
    return a < 0.0 || b < 0.0;
  }

  Subtree build(const Point& start, int dir, std::size_t depth) {
    if (depth == 0) return leaf(start, dir);
    Subtree t = build(start, dir, depth - 1);
    if (!t.valid) return t;
    Subtree t2 = build(dir > 0 ? t.plus : t.minus, dir, depth - 1);
    t.sum_accept += t2.sum_accept;
    t.n_leapfrog += t2.n_leapfrog;
    if (!t2.valid) {
      t.valid = false;
      t.divergent = t2.divergent;
      return t;
    }
    const double lw = log_add_exp(t.log_weight, t2.log_weight);
    if (std::log(rng_.uniform_open()) < t2.log_weight - lw) {
      t.x_prop = std::move(t2.x_prop);
      t.u_prop = t2.u_prop;
    }
    t.log_weight = lw;
    if (dir > 0) {
      t.plus = std::move(t2.plus);
    } else {
      t.minus = std::move(t2.minus);
    }
    if (turned(t.minus, t.plus)) t.valid = false;
    return t;
  }

 private:
  Subtree leaf(const Point& start, int dir) {
    Subtree t;
    Point q = start;
    q.u = leapfrog(potential_, q.x, q.p, q.g, dir * eps_, inv_mass_, 1);
    const double h = q.u + kinetic_energy(q.p, inv_mass_);
    t.n_leapfrog = 1;
    if (!std::isfinite(h) || h - h0_ > threshold_) {
      t.valid = false;
      t.divergent = true;
      return t;
    }
    t.log_weight = h0_ - h;
    t.sum_accept = std::min(1.0, std::exp(h0_ - h));
    t.x_prop = q.x;
    t.u_prop = q.u;
    t.minus = q;
    t.plus = std::move(q);
    return t;
  }

  const SmoothTarget& potential_;
  std::span<const double> inv_mass_;
  double eps_, h0_, threshold_;
  Rng& rng_;
};

struct Transition {
  double accept_stat = 0.0;
  bool divergent = false;
  std::size_t depth = 0;
  std::size_t n_leapfrog = 0;
};

Transition nuts_transition(const SmoothTarget& potential, Point& current, std::span<const double> inv_mass,
                           double eps, const NutsConfig& cfg, Rng& rng) {
  draw_momentum(current.p, inv_mass, rng);
  const double h0 = current.u + kinetic_energy(current.p, inv_mass);
  TreeBuilder builder(potential, inv_mass, eps, h0, cfg.divergence_threshold, rng);

  Subtree tree;
  tree.minus = current;
  tree.plus = current;
  tree.x_prop = current.x;
  tree.u_prop = current.u;
  tree.log_weight = 0.0;

  Transition tr;
  while (tr.depth < cfg.max_depth) {
    const int dir = rng.uniform() < 0.5 ? -1 : 1;
    Subtree sub = builder.build(dir > 0 ? tree.plus : tree.minus, dir, tr.depth);
    ++tr.depth;
    tree.sum_accept += sub.sum_accept;
    tree.n_leapfrog += sub.n_leapfrog;
    if (!sub.valid) {
      tr.divergent = sub.divergent;
      break;
    }
    if (std::log(rng.uniform_open()) < sub.log_weight - tree.log_weight) {
      tree.x_prop = std::move(sub.x_prop);
      tree.u_prop = sub.u_prop;
    }
    tree.log_weight = log_add_exp(tree.log_weight, sub.log_weight);
    if (dir > 0) {
      tree.plus = std::move(sub.plus);
    } else {
      tree.minus = std::move(sub.minus);
    }
    if (builder.turned(tree.minus, tree.plus)) break;
  }

  tr.n_leapfrog = tree.n_leapfrog;
  tr.accept_stat = tree.n_leapfrog > 0 ? tree.sum_accept / static_cast<double>(tree.n_leapfrog) : 0.0;
  if (tree.x_prop != current.x) {
    current.x = std::move(tree.x_prop);
    current.u = potential.value_and_gradient(current.x, current.g);
  }
  return tr;
}

}  // namespace

NutsResult nuts_run(const SmoothTarget& potential, std::span<const double> x0, const NutsConfig& cfg,
                    const SampleSink& sink) {
  cfg.validate();
  const std::size_t m = potential.dimension();
  if (x0.size() != m) throw std::invalid_argument("nuts: start point has the wrong dimension");
  if (!cfg.inv_mass.empty() && cfg.inv_mass.size() != m) throw std::invalid_argument("nuts: inverse mass has the wrong length");
  if (!all_finite(x0)) throw NumericalError("nuts: start point is not finite");

  Point current{std::vector<double>(x0.begin(), x0.end()), std::vector<double>(m), std::vector<double>(m), 0.0};
  current.u = potential.value_and_gradient(current.x, current.g);
  if (!std::isfinite(current.u) || !all_finite(current.g)) throw NumericalError("nuts: energy at the start point is not finite");

  Rng rng(cfg.seed);
  const std::span<const double> inv_mass = cfg.inv_mass;
  double eps = cfg.initial_step > 0.0 ? cfg.initial_step : find_reasonable_step_size(potential, current.x, inv_mass, rng);
  const std::size_t batch = cfg.batch_size > 0 ? cfg.batch_size : std::max<std::size_t>(1, cfg.n_samples / 50);
  NutsResult result{ChainAccumulator(m, batch, cfg.reservoir_stride), {}, 0.0, eps, 0.0, 0, 0.0, 0, {}, {}};
  DualAveraging adapt(eps, cfg.target_accept, cfg.gamma, cfg.t0, cfg.kappa);

  double accept_sum = 0.0;
  std::size_t gradient_evals = 1;
  const std::size_t total = cfg.n_adapt + cfg.n_samples;
  for (std::size_t it = 0; it < total; ++it) {
    const bool adapting = it < cfg.n_adapt;
    const Transition tr = nuts_transition(potential, current, inv_mass, eps, cfg, rng);
    gradient_evals += tr.n_leapfrog + 1;

    DiagnosticRow row{it, current.u, eps, tr.accept_stat, tr.divergent, tr.depth, adapting};
    result.diagnostics.push_back(row);

    if (adapting) {
      eps = adapt.update(tr.accept_stat);
      if (it + 1 == cfg.n_adapt) eps = adapt.final_step();
    } else {
      accept_sum += tr.accept_stat;
      if (tr.divergent) ++result.divergences;
      result.samples.add(current.x);
      if (sink) sink(it - cfg.n_adapt, current.x);
    }
  }

  result.step_size = eps;
  result.mean_accept_stat = accept_sum / static_cast<double>(cfg.n_samples);
  result.divergence_rate = static_cast<double>(result.divergences) / static_cast<double>(cfg.n_samples);
  result.gradient_evaluations = gradient_evals;
  result.final_state = current.x;
  if (result.divergence_rate > 0.1) {
    result.warning = "nuts: " + std::to_string(result.divergences) + " of " + std::to_string(cfg.n_samples) +
                     " post-adaptation iterations diverged; the step size or mass matrix is badly scaled";
  }
  return result;
}

}  // namespace baytomo
