#include "baytomo/priors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace baytomo {

namespace {

// |t| or its Charbonnier surrogate; the rationalized form avoids cancellation
// when |t| << beta
double rho(double t, double beta) {
  if (beta <= 0.0) return std::abs(t);
  return t * t / (std::sqrt(t * t + beta * beta) + beta);
}

double rho_prime(double t, double beta) {
  if (beta <= 0.0) return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
  return t / std::sqrt(t * t + beta * beta);
}

// isotropic norm of (a, b)
double rho2(double a, double b, double beta) {
  const double sq = a * a + b * b;
  if (beta <= 0.0) return std::sqrt(sq);
  return sq / (std::sqrt(sq + beta * beta) + beta);
}

// log(c^2 + d^2) - log(c) without overflow for huge d
double cauchy_term(double c, double d) { return 2.0 * std::log(std::hypot(c, d)) - std::log(c); }
double cauchy_term_prime(double c, double d) { return 2.0 * d / (c * c + d * d); }

void check_size(const GridShape& shape, std::span<const double> x) {
  if (x.size() != shape.size()) throw std::invalid_argument("prior: image size does not match grid shape");
}

// Visits the in-grid neighbour pairs (k, k_up) and (k, k_left).
template <typename Fn>
void for_each_pair(const GridShape& shape, Fn&& fn) {
  for (std::size_t i = 0; i < shape.rows; ++i) {
    for (std::size_t j = 0; j < shape.cols; ++j) {
      const std::size_t k = shape.index(i, j);
      if (i > 0) fn(k, k - shape.cols);
      if (j > 0) fn(k, k - 1);
    }
  }
}

template <typename Fn>
void for_each_boundary(const GridShape& shape, Fn&& fn) {
  for (std::size_t i = 0; i < shape.rows; ++i) {
    for (std::size_t j = 0; j < shape.cols; ++j) {
      if (shape.on_boundary(i, j)) fn(shape.index(i, j));
    }
  }
}

// Cauchy sheet mixed difference at (i, j) with zero padding.
template <typename Get>
double sheet_difference(const GridShape& shape, std::size_t i, std::size_t j, Get&& get) {
  const double up = i > 0 ? get(shape.index(i - 1, j)) : 0.0;
  const double left = j > 0 ? get(shape.index(i, j - 1)) : 0.0;
  const double diag = (i > 0 && j > 0) ? get(shape.index(i - 1, j - 1)) : 0.0;
  return get(shape.index(i, j)) - up - left + diag;
}

}  // namespace

// --- Gaussian ---------------------------------------------------------------

double gaussian_energy(const GaussianPriorParams& p, const GridShape& shape, std::span<const double> x) {
  check_size(shape, x);
  const double inv_pr = 1.0 / (p.sigma_pr * p.sigma_pr);
  const double inv_b = 1.0 / (p.sigma_boundary * p.sigma_boundary);
  double diff = 0.0;
  for_each_pair(shape, [&](std::size_t a, std::size_t b) { diff += (x[a] - x[b]) * (x[a] - x[b]); });
  double bnd = 0.0;
  for_each_boundary(shape, [&](std::size_t k) { bnd += x[k] * x[k]; });
  return diff * inv_pr + bnd * inv_b;
}

void gaussian_grad(const GaussianPriorParams& p, const GridShape& shape, std::span<const double> x,
                   std::span<double> grad) {
  check_size(shape, x);
  const double inv_pr = 1.0 / (p.sigma_pr * p.sigma_pr);
  const double inv_b = 1.0 / (p.sigma_boundary * p.sigma_boundary);
  std::fill(grad.begin(), grad.end(), 0.0);
  for_each_pair(shape, [&](std::size_t a, std::size_t b) {
    const double g = 2.0 * (x[a] - x[b]) * inv_pr;
    grad[a] += g;
    grad[b] -= g;
  });
  for_each_boundary(shape, [&](std::size_t k) { grad[k] += 2.0 * x[k] * inv_b; });
}

// --- TV ---------------------------------------------------------------------

double tv_energy(const TvPriorParams& p, const GridShape& shape, std::span<const double> x) {
  check_size(shape, x);
  const double beta = p.smoothing_beta;
  double interior = 0.0;
  if (p.isotropic) {
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const std::size_t k = shape.index(i, j);
        const double dv = i > 0 ? x[k] - x[k - shape.cols] : 0.0;
        const double dh = j > 0 ? x[k] - x[k - 1] : 0.0;
        interior += rho2(dv, dh, beta);
      }
    }
  } else {
    for_each_pair(shape, [&](std::size_t a, std::size_t b) { interior += rho(x[a] - x[b], beta); });
  }
  double bnd = 0.0;
  for_each_boundary(shape, [&](std::size_t k) { bnd += rho(x[k], beta); });
  return p.alpha * interior + p.alpha_boundary * bnd;
}

void tv_grad(const TvPriorParams& p, const GridShape& shape, std::span<const double> x, std::span<double> grad) {
  check_size(shape, x);
  const double beta = p.smoothing_beta;
  std::fill(grad.begin(), grad.end(), 0.0);
  if (p.isotropic) {
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const std::size_t k = shape.index(i, j);
        const double dv = i > 0 ? x[k] - x[k - shape.cols] : 0.0;
        const double dh = j > 0 ? x[k] - x[k - 1] : 0.0;
        const double norm = std::sqrt(dv * dv + dh * dh + beta * beta);
        if (norm == 0.0) continue;
        const double gv = p.alpha * dv / norm;
        const double gh = p.alpha * dh / norm;
        grad[k] += gv + gh;
        if (i > 0) grad[k - shape.cols] -= gv;
        if (j > 0) grad[k - 1] -= gh;
      }
    }
  } else {
    for_each_pair(shape, [&](std::size_t a, std::size_t b) {
      const double g = p.alpha * rho_prime(x[a] - x[b], beta);
      grad[a] += g;
      grad[b] -= g;
    });
  }
  for_each_boundary(shape, [&](std::size_t k) { grad[k] += p.alpha_boundary * rho_prime(x[k], beta); });
}

// --- Besov ------------------------------------------------------------------

double besov_energy(const BesovPriorParams& p, std::span<const double> x) {
  if (!p.dwt) throw std::invalid_argument("Besov prior without a DWT operator");
  const auto w = p.dwt->analyze(x);
  double sum = 0.0;
  for (double c : w) sum += rho(c, p.smoothing_beta);
  return p.scale * sum;
}

void besov_grad(const BesovPriorParams& p, std::span<const double> x, std::span<double> grad) {
  if (!p.dwt) throw std::invalid_argument("Besov prior without a DWT operator");
  auto w = p.dwt->analyze(x);
  for (double& c : w) c = p.scale * rho_prime(c, p.smoothing_beta);
  const auto g = p.dwt->synthesize(w);
  std::copy(g.begin(), g.end(), grad.begin());
}

// --- Cauchy -----------------------------------------------------------------

double cauchy_energy(const CauchyPriorParams& p, const GridShape& shape, std::span<const double> x) {
  check_size(shape, x);
  double sum = 0.0;
  if (p.formulation == CauchyForm::walk) {
    const double c = p.h * p.lambda;
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const std::size_t k = shape.index(i, j);
        const double up = i > 0 ? x[k - shape.cols] : 0.0;
        const double left = j > 0 ? x[k - 1] : 0.0;
        sum += cauchy_term(c, x[k] - up) + cauchy_term(c, x[k] - left);
      }
    }
  } else {
    const double c = p.h * p.h * p.lambda;
    auto get = [&](std::size_t k) { return x[k]; };
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) sum += cauchy_term(c, sheet_difference(shape, i, j, get));
    }
  }
  return sum;
}

void cauchy_grad(const CauchyPriorParams& p, const GridShape& shape, std::span<const double> x,
                 std::span<double> grad) {
  check_size(shape, x);
  std::fill(grad.begin(), grad.end(), 0.0);
  if (p.formulation == CauchyForm::walk) {
    const double c = p.h * p.lambda;
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const std::size_t k = shape.index(i, j);
        const double up = i > 0 ? x[k - shape.cols] : 0.0;
        const double left = j > 0 ? x[k - 1] : 0.0;
        const double gv = cauchy_term_prime(c, x[k] - up);
        const double gh = cauchy_term_prime(c, x[k] - left);
        grad[k] += gv + gh;
        if (i > 0) grad[k - shape.cols] -= gv;
        if (j > 0) grad[k - 1] -= gh;
      }
    }
  } else {
    const double c = p.h * p.h * p.lambda;
    auto get = [&](std::size_t k) { return x[k]; };
    for (std::size_t i = 0; i < shape.rows; ++i) {
      for (std::size_t j = 0; j < shape.cols; ++j) {
        const double g = cauchy_term_prime(c, sheet_difference(shape, i, j, get));
        grad[shape.index(i, j)] += g;
        if (i > 0) grad[shape.index(i - 1, j)] -= g;
        if (j > 0) grad[shape.index(i, j - 1)] -= g;
        if (i > 0 && j > 0) grad[shape.index(i - 1, j - 1)] += g;
      }
    }
  }
}

// --- local energies for single-pixel deltas ---------------------------------

namespace {

// Sum of every energy term that involves pixel k, evaluated with x[k] = v.
// Non-Besov priors only.
double local_energy(const PriorModel::Params& params, const GridShape& shape, std::span<const double> x,
                    std::size_t k, double v) {
  auto get = [&](std::size_t q) { return q == k ? v : x[q]; };
  const std::size_t i = k / shape.cols;
  const std::size_t j = k % shape.cols;
  const bool has_up = i > 0, has_down = i + 1 < shape.rows, has_left = j > 0, has_right = j + 1 < shape.cols;

  if (const auto* g = std::get_if<GaussianPriorParams>(&params)) {
    double diff = 0.0;
    auto sq = [&](std::size_t q) { diff += (v - x[q]) * (v - x[q]); };
    if (has_up) sq(k - shape.cols);
    if (has_down) sq(k + shape.cols);
    if (has_left) sq(k - 1);
    if (has_right) sq(k + 1);
    double e = diff / (g->sigma_pr * g->sigma_pr);
    if (shape.on_boundary(i, j)) e += v * v / (g->sigma_boundary * g->sigma_boundary);
    return e;
  }
  if (const auto* t = std::get_if<TvPriorParams>(&params)) {
    const double beta = t->smoothing_beta;
    double interior = 0.0;
    if (t->isotropic) {
      // terms at (i, j), (i+1, j) and (i, j+1) contain pixel k
      auto term = [&](std::size_t p, std::size_t q) {
        const std::size_t c = shape.index(p, q);
        const double dv = p > 0 ? get(c) - get(c - shape.cols) : 0.0;
        const double dh = q > 0 ? get(c) - get(c - 1) : 0.0;
        return rho2(dv, dh, beta);
      };
      interior += term(i, j);
      if (has_down) interior += term(i + 1, j);
      if (has_right) interior += term(i, j + 1);
    } else {
      auto pair = [&](std::size_t q) { interior += rho(v - x[q], beta); };
      if (has_up) pair(k - shape.cols);
      if (has_down) pair(k + shape.cols);
      if (has_left) pair(k - 1);
      if (has_right) pair(k + 1);
    }
    double e = t->alpha * interior;
    if (shape.on_boundary(i, j)) e += t->alpha_boundary * rho(v, beta);
    return e;
  }
  if (const auto* c = std::get_if<CauchyPriorParams>(&params)) {
    double e = 0.0;
    if (c->formulation == CauchyForm::walk) {
      const double scale = c->h * c->lambda;
      e += cauchy_term(scale, v - (has_up ? x[k - shape.cols] : 0.0));
      e += cauchy_term(scale, v - (has_left ? x[k - 1] : 0.0));
      if (has_down) e += cauchy_term(scale, x[k + shape.cols] - v);
      if (has_right) e += cauchy_term(scale, x[k + 1] - v);
    } else {
      const double scale = c->h * c->h * c->lambda;
      e += cauchy_term(scale, sheet_difference(shape, i, j, get));
      if (has_down) e += cauchy_term(scale, sheet_difference(shape, i + 1, j, get));
      if (has_right) e += cauchy_term(scale, sheet_difference(shape, i, j + 1, get));
      if (has_down && has_right) e += cauchy_term(scale, sheet_difference(shape, i + 1, j + 1, get));
    }
    return e;
  }
  throw std::logic_error("local_energy: unsupported prior");
}

double besov_local_delta(const BesovPriorParams& b, std::span<const double> w, std::size_t k, double delta) {
  const auto rows = b.dwt->column_rows(k);
  const auto vals = b.dwt->column_values(k);
  double sum = 0.0;
  for (std::size_t e = 0; e < rows.size(); ++e) {
    const double old_c = w[rows[e]];
    sum += rho(old_c + delta * vals[e], b.smoothing_beta) - rho(old_c, b.smoothing_beta);
  }
  return b.scale * sum;
}

}  // namespace

// --- PriorModel -------------------------------------------------------------

PriorModel::PriorModel(GridShape shape, Params params) : shape_(shape), params_(std::move(params)) {
  shape_.validate();
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianPriorParams>) {
          positive(p.sigma_pr, "sigma_pr");
          positive(p.sigma_boundary, "sigma_boundary");
        } else if constexpr (std::is_same_v<T, TvPriorParams>) {
          positive(p.alpha, "alpha");
          positive(p.alpha_boundary, "alpha_boundary");
          if (!(p.smoothing_beta >= 0.0)) throw std::invalid_argument("smoothing_beta must be >= 0");
        } else if constexpr (std::is_same_v<T, BesovPriorParams>) {
          positive(p.scale, "scale");
          if (!(p.smoothing_beta >= 0.0)) throw std::invalid_argument("smoothing_beta must be >= 0");
          if (shape_.rows != shape_.cols) throw std::invalid_argument("Besov prior needs a square grid");
          if (!p.dwt) p.dwt = std::make_shared<DwtOperator>(shape_.rows, p.levels);
          if (p.dwt->side() != shape_.rows || p.dwt->levels() != p.levels) {
            throw std::invalid_argument("Besov DWT operator does not match grid or level count");
          }
        } else {
          positive(p.lambda, "lambda");
          positive(p.h, "h");
        }
      },
      params_);
}

std::string PriorModel::name() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianPriorParams>) return "gaussian";
        else if constexpr (std::is_same_v<T, TvPriorParams>) return p.isotropic ? "tv_iso" : "tv";
        else if constexpr (std::is_same_v<T, BesovPriorParams>) return "besov";
        else return p.formulation == CauchyForm::walk ? "cauchy" : "cauchy_sheet";
      },
      params_);
}

double PriorModel::energy(std::span<const double> x) const {
  return std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianPriorParams>) return gaussian_energy(p, shape_, x);
        else if constexpr (std::is_same_v<T, TvPriorParams>) return tv_energy(p, shape_, x);
        else if constexpr (std::is_same_v<T, BesovPriorParams>) return besov_energy(p, x);
        else return cauchy_energy(p, shape_, x);
      },
      params_);
}

void PriorModel::gradient(std::span<const double> x, std::span<double> grad) const {
  if (grad.size() != shape_.size()) throw std::invalid_argument("prior gradient: output size mismatch");
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GaussianPriorParams>) gaussian_grad(p, shape_, x, grad);
        else if constexpr (std::is_same_v<T, TvPriorParams>) tv_grad(p, shape_, x, grad);
        else if constexpr (std::is_same_v<T, BesovPriorParams>) besov_grad(p, x, grad);
        else cauchy_grad(p, shape_, x, grad);
      },
      params_);
}

double PriorModel::energy_and_gradient(std::span<const double> x, std::span<double> grad) const {
  gradient(x, grad);
  return energy(x);
}

double PriorModel::delta_energy(std::span<const double> x, PixelIndex pixel, double new_value) const {
  if (pixel.row >= shape_.rows || pixel.col >= shape_.cols) throw std::out_of_range("delta_energy: pixel out of range");
  check_size(shape_, x);
  const std::size_t k = shape_.index(pixel.row, pixel.col);
  if (const auto* b = std::get_if<BesovPriorParams>(&params_)) {
    const auto w = b->dwt->analyze(x);
    return besov_local_delta(*b, w, k, new_value - x[k]);
  }
  return local_energy(params_, shape_, x, k, new_value) - local_energy(params_, shape_, x, k, x[k]);
}

double PriorModel::smoothing_beta() const {
  if (const auto* t = std::get_if<TvPriorParams>(&params_)) return t->smoothing_beta;
  if (const auto* b = std::get_if<BesovPriorParams>(&params_)) return b->smoothing_beta;
  return 0.0;
}

PriorModel PriorModel::with_smoothing(double beta) const {
  Params p = params_;
  if (auto* t = std::get_if<TvPriorParams>(&p)) t->smoothing_beta = beta;
  if (auto* b = std::get_if<BesovPriorParams>(&p)) b->smoothing_beta = beta;
  return PriorModel(shape_, std::move(p));
}

// --- PriorDeltaCache --------------------------------------------------------

PriorDeltaCache::PriorDeltaCache(const PriorModel& prior, std::span<const double> x) : prior_(prior) { rebuild(x); }

const BesovPriorParams* PriorDeltaCache::besov() const { return std::get_if<BesovPriorParams>(&prior_.params()); }

void PriorDeltaCache::rebuild(std::span<const double> x) {
  check_size(prior_.shape(), x);
  if (const auto* b = besov()) coefficients_ = b->dwt->analyze(x);
}

double PriorDeltaCache::delta(std::span<const double> x, std::size_t pixel, double new_value) const {
  if (const auto* b = besov()) return besov_local_delta(*b, coefficients_, pixel, new_value - x[pixel]);
  return local_energy(prior_.params(), prior_.shape(), x, pixel, new_value) -
         local_energy(prior_.params(), prior_.shape(), x, pixel, x[pixel]);
}

void PriorDeltaCache::accept(std::size_t pixel, double old_value, double new_value) {
  const auto* b = besov();
  if (!b) return;
  const double delta = new_value - old_value;
  const auto rows = b->dwt->column_rows(pixel);
  const auto vals = b->dwt->column_values(pixel);
  for (std::size_t e = 0; e < rows.size(); ++e) coefficients_[rows[e]] += delta * vals[e];
}

double default_smoothing_beta(double dynamic_range) { return std::max(1e-8 * std::abs(dynamic_range), 1e-12); }

// --- PriorSpec --------------------------------------------------------------

const std::vector<std::string>& prior_names() {
  static const std::vector<std::string> names{"gaussian", "tv", "tv_iso", "besov", "cauchy", "cauchy_sheet"};
  return names;
}

const std::vector<std::string>& prior_parameter_names(const std::string& name) {
  static const std::vector<std::string> gaussian{"sigma_pr", "sigma_boundary"};
  static const std::vector<std::string> tv{"alpha", "alpha_boundary", "beta"};
  static const std::vector<std::string> besov{"scale", "levels", "beta"};
  static const std::vector<std::string> cauchy{"lambda", "h"};
  if (name == "gaussian") return gaussian;
  if (name == "tv" || name == "tv_iso") return tv;
  if (name == "besov") return besov;
  if (name == "cauchy" || name == "cauchy_sheet") return cauchy;
  throw std::invalid_argument("unknown prior '" + name + "'");
}

PriorSpec resolve_prior_spec(PriorSpec spec, const GridShape& shape) {
  const auto& allowed = prior_parameter_names(spec.name);
  for (const auto& [key, value] : spec.params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("prior '" + spec.name + "' has no parameter '" + key + "'");
    }
  }
  auto& p = spec.params;
  if (spec.name == "gaussian") {
    p.try_emplace("sigma_pr", 1.0);
    p.try_emplace("sigma_boundary", p.at("sigma_pr"));
  } else if (spec.name == "tv" || spec.name == "tv_iso") {
    p.try_emplace("alpha", 1.0);
    p.try_emplace("alpha_boundary", p.at("alpha"));
    p.try_emplace("beta", 0.0);
  } else if (spec.name == "besov") {
    p.try_emplace("scale", 1.0);
    p.try_emplace("levels", static_cast<double>(std::max<std::size_t>(max_dwt_levels(shape.rows), 1)));
    p.try_emplace("beta", 0.0);
  } else {
    p.try_emplace("lambda", 1.0);
    p.try_emplace("h", shape.pixel_size);
  }
  return spec;
}

PriorModel make_prior(const PriorSpec& raw, const GridShape& shape) {
  const PriorSpec spec = resolve_prior_spec(raw, shape);
  const auto& p = spec.params;
  if (spec.name == "gaussian") return PriorModel(shape, GaussianPriorParams{p.at("sigma_pr"), p.at("sigma_boundary")});
  if (spec.name == "tv" || spec.name == "tv_iso") {
    return PriorModel(shape, TvPriorParams{p.at("alpha"), p.at("alpha_boundary"), spec.name == "tv_iso", p.at("beta")});
  }
  if (spec.name == "besov") {
    const double levels = p.at("levels");
    if (levels < 1.0 || levels != std::floor(levels)) throw std::invalid_argument("besov levels must be a positive integer");
    return PriorModel(shape, BesovPriorParams{static_cast<std::size_t>(levels), p.at("scale"), p.at("beta"), nullptr});
  }
  return PriorModel(shape, CauchyPriorParams{p.at("lambda"), p.at("h"),
                                             spec.name == "cauchy" ? CauchyForm::walk : CauchyForm::sheet});
}

void set_prior_parameter(PriorSpec& spec, const std::string& name, double value, bool tie_boundary) {
  const auto& allowed = prior_parameter_names(spec.name);
  if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
    throw std::invalid_argument("prior '" + spec.name + "' has no parameter '" + name + "'");
  }
  spec.params[name] = value;
  if (tie_boundary) {
    if (name == "alpha") spec.params["alpha_boundary"] = value;
    if (name == "sigma_pr") spec.params["sigma_boundary"] = value;
  }
}

}  // namespace baytomo
