#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "baytomo/dwt.hpp"
#include "baytomo/grid.hpp"

namespace baytomo {

// Prior energies G(x) = -log pi(x) up to an additive constant. Difference
// terms exist only between in-grid neighbours; the Gaussian and TV priors
// add a separate penalty on the outermost ring of pixels, while the Cauchy
// priors treat neighbours above row 0 and left of column 0 as zero.
//
// TV and Besov have kinks at zero. With smoothing_beta > 0 every |t| is
// replaced by sqrt(t^2 + beta^2) - beta in both energy and gradient; with
// beta == 0 the energy is exact and the gradient is a subgradient (sign).

struct GaussianPriorParams {
  double sigma_pr = 1.0;
  double sigma_boundary = 1.0;
};

struct TvPriorParams {
  double alpha = 1.0;
  double alpha_boundary = 1.0;
  bool isotropic = false;
  double smoothing_beta = 0.0;
};

struct BesovPriorParams {
  std::size_t levels = 1;
  double scale = 1.0;
  double smoothing_beta = 0.0;
  /// Built on demand by PriorModel when null.
  std::shared_ptr<const DwtOperator> dwt;
};

enum class CauchyForm { walk, sheet };

struct CauchyPriorParams {
  double lambda = 1.0;
  double h = 1.0;
  CauchyForm formulation = CauchyForm::walk;
};

double gaussian_energy(const GaussianPriorParams& p, const GridShape& shape, std::span<const double> x);
void gaussian_grad(const GaussianPriorParams& p, const GridShape& shape, std::span<const double> x,
                   std::span<double> grad);

double tv_energy(const TvPriorParams& p, const GridShape& shape, std::span<const double> x);
void tv_grad(const TvPriorParams& p, const GridShape& shape, std::span<const double> x, std::span<double> grad);

/// scale * sum_i rho(W_i), W = D x.
double besov_energy(const BesovPriorParams& p, std::span<const double> x);
void besov_grad(const BesovPriorParams& p, std::span<const double> x, std::span<double> grad);

double cauchy_energy(const CauchyPriorParams& p, const GridShape& shape, std::span<const double> x);
void cauchy_grad(const CauchyPriorParams& p, const GridShape& shape, std::span<const double> x,
                 std::span<double> grad);

/// One of the four priors bound to a grid shape.
class PriorModel {
 public:
  using Params = std::variant<GaussianPriorParams, TvPriorParams, BesovPriorParams, CauchyPriorParams>;

  PriorModel(GridShape shape, Params params);

  const GridShape& shape() const { return shape_; }
  const Params& params() const { return params_; }
  /// gaussian, tv, tv_iso, besov, cauchy or cauchy_sheet
  std::string name() const;

  double energy(std::span<const double> x) const;
  double energy(const ImageGrid& image) const { return energy(image.values()); }
  void gradient(std::span<const double> x, std::span<double> grad) const;
  double energy_and_gradient(std::span<const double> x, std::span<double> grad) const;

  /// G(x with pixel set to new_value) - G(x), touching only the terms that
  /// involve the pixel. Besov recomputes the transform here; samplers use
  /// PriorDeltaCache instead.
  double delta_energy(std::span<const double> x, PixelIndex pixel, double new_value) const;

  double smoothing_beta() const;
  PriorModel with_smoothing(double beta) const;
  /// Same prior with exact (beta = 0) energies.
  PriorModel unsmoothed() const { return with_smoothing(0.0); }

 private:
  GridShape shape_;
  Params params_;
};

/// Single-pixel energy deltas for a component-wise sampler. For Besov the
/// wavelet coefficients W = D x are cached and patched on every accepted
/// move, so a delta costs O(levels). One sampler owns one cache.
class PriorDeltaCache {
 public:
  PriorDeltaCache(const PriorModel& prior, std::span<const double> x);

  double delta(std::span<const double> x, std::size_t pixel, double new_value) const;
  /// Must be called after x[pixel] changed from old_value to new_value.
  void accept(std::size_t pixel, double old_value, double new_value);
  void rebuild(std::span<const double> x);

  std::span<const double> coefficients() const { return coefficients_; }
  const PriorModel& prior() const { return prior_; }

 private:
  const BesovPriorParams* besov() const;

  PriorModel prior_;
  std::vector<double> coefficients_;
};

/// Charbonnier scale used when a gradient-based caller does not set one:
/// 1e-8 of the expected dynamic range, at least 1e-12.
double default_smoothing_beta(double dynamic_range);

/// Text-level prior selection: a name plus named numeric parameters.
///   gaussian      sigma_pr, sigma_boundary
///   tv, tv_iso    alpha, alpha_boundary, beta
///   besov         scale, levels, beta
///   cauchy,
///   cauchy_sheet  lambda, h
/// Missing parameters take defaults: boundary parameters follow their
/// interior parameter, levels is the full depth, h is the pixel size,
/// beta is 0.
struct PriorSpec {
  std::string name = "gaussian";
  std::map<std::string, double> params;
};

const std::vector<std::string>& prior_names();
const std::vector<std::string>& prior_parameter_names(const std::string& name);
/// Fills every parameter the named prior uses.
PriorSpec resolve_prior_spec(PriorSpec spec, const GridShape& shape);
PriorModel make_prior(const PriorSpec& spec, const GridShape& shape);
/// Sets a parameter; with tie_boundary, setting alpha or sigma_pr also sets
/// the matching boundary parameter.
void set_prior_parameter(PriorSpec& spec, const std::string& name, double value, bool tie_boundary);

}  // namespace baytomo
