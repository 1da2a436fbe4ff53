#include "baytomo/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace baytomo {

void LbfgsConfig::validate() const {
  if (memory == 0) throw std::invalid_argument("L-BFGS memory must be positive");
  if (max_iterations == 0) throw std::invalid_argument("L-BFGS max_iterations must be positive");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("L-BFGS grad_tol must be positive");
  if (!(line_search.c1 > 0.0 && line_search.c1 < line_search.c2 && line_search.c2 < 1.0)) {
    throw std::invalid_argument("Wolfe parameters need 0 < c1 < c2 < 1");
  }
  if (max_line_search_evaluations < 2) throw std::invalid_argument("line search needs at least two evaluations");
}

std::string to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;
  std::vector<double> x;
  std::vector<double> g;
};

class LineSearch {
 public:
  LineSearch(const SmoothTarget& f, const LbfgsConfig& cfg, std::size_t& evaluations)
      : f_(f), cfg_(cfg), evaluations_(evaluations) {}

  // Returns true when a strong-Wolfe point was found; `best` always holds the
  // lowest finite trial that satisfies sufficient decrease, if any.
  bool search(std::span<const double> x, double f0, std::span<const double> d, double slope0, double alpha0,
              Trial& result, Trial& best) {
    x_ = x;
    d_ = d;
    f0_ = f0;
    slope0_ = slope0;
    budget_ = cfg_.max_line_search_evaluations;
    best_ = &best;
    best.alpha = 0.0;

    Trial prev{0.0, f0, slope0, {}, {}};
    double alpha = alpha0;
    for (std::size_t iter = 0; budget_ > 0; ++iter) {
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || (iter > 0 && cur.f >= prev.f)) return zoom(prev, cur, result);
      if (std::abs(cur.slope) <= -cfg_.line_search.c2 * slope0_) {
        result = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, result);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  bool armijo(const Trial& t) const {
    return std::isfinite(t.f) && t.f <= f0_ + cfg_.line_search.c1 * t.alpha * slope0_;
  }

  Trial evaluate(double alpha) {
    --budget_;
    ++evaluations_;
    Trial t;
    t.alpha = alpha;
    t.x.resize(x_.size());
    t.g.resize(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) t.x[i] = x_[i] + alpha * d_[i];
    t.f = f_.value_and_gradient(t.x, t.g);
    if (!std::isfinite(t.f) || !all_finite(t.g)) {
      t.f = std::numeric_limits<double>::infinity();
      t.slope = std::numeric_limits<double>::quiet_NaN();
      return t;
    }
    t.slope = dot(t.g, d_);
    if (armijo(t) && (best_->alpha == 0.0 || t.f < best_->f)) *best_ = t;
    return t;
  }

  bool zoom(Trial lo, Trial hi, Trial& result) {
    while (budget_ > 0) {
      const double width = hi.alpha - lo.alpha;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) return false;
      double alpha = 0.5 * (lo.alpha + hi.alpha);
      if (std::isfinite(hi.f) && std::isfinite(hi.slope)) {
        const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
        const double disc = d1 * d1 - lo.slope * hi.slope;
        if (disc >= 0.0) {
          const double d2 = std::copysign(std::sqrt(disc), width);
          const double cubic = hi.alpha - width * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
          const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
          const double margin = 0.1 * (b - a);
          if (std::isfinite(cubic) && cubic > a + margin && cubic < b - margin) alpha = cubic;
        }
      }
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -cfg_.line_search.c2 * slope0_) {
          result = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return false;
  }

  const SmoothTarget& f_;
  const LbfgsConfig& cfg_;
  std::size_t& evaluations_;
  std::span<const double> x_;
  std::span<const double> d_;
  double f0_ = 0.0;
  double slope0_ = 0.0;
  std::size_t budget_ = 0;
  Trial* best_ = nullptr;
};

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// d = -H g by the two-loop recursion
void two_loop(const std::deque<CurvaturePair>& memory, std::span<const double> g, std::vector<double>& d) {
  d.assign(g.begin(), g.end());
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * dot(memory[i].s, d);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= alpha[i] * memory[i].y[k];
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * dot(memory[i].y, d);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += (alpha[i] - beta) * memory[i].s[k];
  }
  for (double& v : d) v = -v;
}

}  // namespace

LbfgsResult lbfgs_minimize(const SmoothTarget& f, const LbfgsConfig& cfg, std::span<const double> x0) {
  cfg.validate();
  if (x0.size() != f.dimension()) throw std::invalid_argument("lbfgs_minimize: x0 has the wrong dimension");

  LbfgsResult result;
  auto& report = result.report;
  std::vector<double> x(x0.begin(), x0.end());
  if (cfg.initial_point == InitialPoint::zero) std::fill(x.begin(), x.end(), 0.0);
  std::vector<double> g(x.size());
  double fx = f.value_and_gradient(x, g);
  report.evaluations = 1;
  if (!std::isfinite(fx) || !all_finite(g)) {
    throw NumericalError("objective is not finite at the initial point (f = " + std::to_string(fx) + ")");
  }
  report.objective_trace.push_back(fx);

  const double g0 = inf_norm(g);
  const double tol = cfg.relative_tolerance ? cfg.grad_tol * std::max(g0, 1.0) : cfg.grad_tol;
  std::deque<CurvaturePair> memory;
  std::vector<double> d;
  LineSearch ls(f, cfg, report.evaluations);

  report.status = LbfgsStatus::max_iterations;
  while (true) {
    const double gnorm = inf_norm(g);
    if (gnorm <= tol) {
      report.status = LbfgsStatus::converged;
      break;
    }
    if (report.iterations >= cfg.max_iterations) break;

    two_loop(memory, g, d);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      memory.clear();
      two_loop(memory, g, d);
      slope = dot(g, d);
    }
    const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / inf_norm(d)) : 1.0;

    Trial step, best;
    bool ok = ls.search(x, fx, d, slope, alpha0, step, best);
    if (!ok && best.alpha > 0.0) {
      step = std::move(best);
      ok = true;
    }
    if (!ok) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      report.status = LbfgsStatus::line_search_failed;
      break;
    }

    CurvaturePair pair{std::vector<double>(x.size()), std::vector<double>(x.size()), 0.0};
    for (std::size_t k = 0; k < x.size(); ++k) {
      pair.s[k] = step.x[k] - x[k];
      pair.y[k] = step.g[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > cfg.memory) memory.pop_front();
    }
    x = std::move(step.x);
    g = std::move(step.g);
    fx = step.f;
    ++report.iterations;
    report.objective_trace.push_back(fx);
  }

  report.final_grad_inf_norm = inf_norm(g);
  report.final_value = fx;
  result.x = std::move(x);
  return result;
}

}  // namespace baytomo
