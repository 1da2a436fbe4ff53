#include "baytomo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "baytomo/grid_search.hpp"
#include "baytomo/hmc.hpp"
#include "baytomo/io.hpp"
#include "baytomo/mwg.hpp"
#include "baytomo/objective.hpp"
#include "baytomo/phantoms.hpp"
#include "baytomo/posterior.hpp"
#include "baytomo/render.hpp"

namespace baytomo {

namespace {

fs::path out_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.output) / name; }

void prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + cfg.output + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_lock(const RunConfig& cfg) { write_text(out_path(cfg, "run.lock"), to_ini(cfg)); }

// Linear gray scale over [0, p99.5] of the reference image.
void render(const RunConfig& cfg, const std::string& name, const ImageGrid& image, const ImageGrid& reference) {
  double hi = percentile(reference.values(), 99.5);
  if (!(hi > 0.0)) hi = 1.0;
  write_pgm(out_path(cfg, name + ".pgm"), image, 0.0, hi);
}

// Log-variance maps are negative, so they use their own [p0.5, p99.5].
void render_spread(const RunConfig& cfg, const std::string& name, const ImageGrid& image) {
  std::vector<double> finite;
  for (double v : image.values()) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  double lo = 0.0, hi = 1.0;
  if (!finite.empty()) {
    lo = percentile(finite, 0.5);
    hi = percentile(finite, 99.5);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  write_pgm(out_path(cfg, name + ".pgm"), image, lo, hi);
}

void write_image_artifact(const RunConfig& cfg, const std::string& name, const ImageGrid& image,
                          const ImageGrid& reference) {
  write_image(out_path(cfg, name), image);
  render(cfg, name, image, reference);
}

struct Summary {
  std::vector<std::pair<std::string, std::string>> lines;
  void add(const std::string& k, const std::string& v) { lines.emplace_back(k, v); }
  void add(const std::string& k, double v) { add(k, format_real(v)); }
  std::string text() const {
    std::string s;
    for (const auto& [k, v] : lines) s += k + " = " + v + "\n";
    return s;
  }
};

ImageGrid image_from(const GridShape& shape, std::span<const double> values) {
  return ImageGrid(shape, std::vector<double>(values.begin(), values.end()));
}

LbfgsResult solve_map(const Problem& problem, const PriorModel& prior, const LbfgsConfig& lcfg) {
  const PosteriorObjective objective(problem.A, problem.y, prior);
  const std::vector<double> x0(problem.A.pixels(), 0.0);
  return lbfgs_minimize(objective, lcfg, x0);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
  return chain == 0 ? seed : Rng(seed, chain).next_u64();
}

}  // namespace

ImageGrid config_truth(const RunConfig& cfg) {
  if (!cfg.truth.empty()) return read_image(cfg.truth);
  if (cfg.phantom.kind == PhantomKind::log) return make_log_slice(cfg.phantom, cfg.slice_index, cfg.slices);
  return make_drillcore_phantom(cfg.phantom);
}

Problem build_problem(const RunConfig& cfg) {
  if (!cfg.sinogram.empty()) {
    SinogramFile file = read_sinogram(cfg.sinogram);
    SparseOperator A = build_projector(file.shape, file.geometry);
    if (A.digest() != file.sinogram.geometry_digest) {
      throw std::runtime_error("sinogram '" + cfg.sinogram + "' does not match the geometry in its header");
    }
    std::optional<ImageGrid> truth;
    if (!cfg.truth.empty()) {
      truth = read_image(cfg.truth);
      if (truth->shape().rows != file.shape.rows || truth->shape().cols != file.shape.cols) {
        throw std::runtime_error("truth image does not match the sinogram grid");
      }
    }
    return {file.shape, std::move(file.geometry), std::move(A), std::move(file.sinogram), std::move(truth)};
  }
  ImageGrid truth = config_truth(cfg);
  const GridShape shape = truth.shape();
  ProjectionGeometry geometry = make_parallel_geometry(shape, cfg.angles, cfg.detectors);
  SparseOperator A = build_projector(shape, geometry);
  Sinogram y = simulate_sinogram(truth, A, cfg.noise_fraction, cfg.resolved_noise_seed());
  return {shape, std::move(geometry), std::move(A), std::move(y), std::move(truth)};
}

double dynamic_range_estimate(const Problem& problem) {
  const double ymax = *std::max_element(problem.y.values.begin(), problem.y.values.end());
  const double extent = std::min(problem.shape.width(), problem.shape.height());
  return std::max(ymax / extent, 0.0);
}

double resolve_smoothing_beta(const RunConfig& cfg, const Problem& problem) {
  return cfg.smoothing_beta > 0.0 ? cfg.smoothing_beta : default_smoothing_beta(dynamic_range_estimate(problem));
}

PriorModel configured_prior(const RunConfig& cfg, const GridShape& shape, double smoothing_beta) {
  PriorSpec spec = cfg.prior;
  const auto& names = prior_parameter_names(spec.name);
  if (std::find(names.begin(), names.end(), "beta") != names.end()) spec.params["beta"] = smoothing_beta;
  return make_prior(spec, shape);
}

LbfgsConfig configured_lbfgs(const RunConfig& cfg) {
  LbfgsConfig l;
  l.memory = cfg.lbfgs.memory;
  l.max_iterations = cfg.lbfgs.max_iterations;
  l.grad_tol = cfg.lbfgs.grad_tol;
  l.line_search.c1 = cfg.lbfgs.c1;
  l.line_search.c2 = cfg.lbfgs.c2;
  l.initial_point = InitialPoint::zero;
  l.validate();
  return l;
}

std::string default_search_parameter(const std::string& prior_name) {
  if (prior_name == "gaussian") return "sigma_pr";
  if (prior_name == "tv" || prior_name == "tv_iso") return "alpha";
  if (prior_name == "besov") return "scale";
  if (prior_name == "cauchy" || prior_name == "cauchy_sheet") return "lambda";
  throw std::invalid_argument("unknown prior '" + prior_name + "'");
}

void run_simulate(RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  if (!cfg.sinogram.empty()) throw std::runtime_error("simulate generates its own sinogram; unset input.sinogram");
  const Problem problem = build_problem(cfg);
  const ImageGrid& truth = *problem.truth;
  write_image_artifact(cfg, "truth", truth, truth);
  write_sinogram(out_path(cfg, "sinogram"), {problem.y, problem.shape, problem.geometry});
  Summary s;
  s.add("command", "simulate");
  s.add("rays", std::to_string(problem.A.rays()));
  s.add("noise_sigma", problem.y.noise_sigma);
  s.add("geometry_digest", format_digest(problem.A.digest()));
  write_text(out_path(cfg, "summary.txt"), s.text());
  write_lock(cfg);
  log << "noise_sigma = " << format_real(problem.y.noise_sigma) << '\n';
}

void run_reconstruct(RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  const Problem problem = build_problem(cfg);
  const double beta = resolve_smoothing_beta(cfg, problem);
  cfg.smoothing_beta = beta;
  const PriorModel smooth_prior = configured_prior(cfg, problem.shape, beta);
  const LbfgsConfig lcfg = configured_lbfgs(cfg);

  Summary s;
  s.add("command", cfg.command);
  s.add("estimator", to_string(cfg.estimator));
  s.add("prior", smooth_prior.name());
  s.add("smoothing_beta", beta);
  s.add("noise_sigma", problem.y.noise_sigma);

  LbfgsResult map = solve_map(problem, smooth_prior, lcfg);
  const ImageGrid map_image = image_from(problem.shape, map.x);
  const ImageGrid& reference = problem.truth ? *problem.truth : map_image;
  if (problem.truth) write_image_artifact(cfg, "truth", *problem.truth, reference);
  write_image_artifact(cfg, "map", map_image, reference);
  s.add("map_status", to_string(map.report.status));
  s.add("map_iterations", std::to_string(map.report.iterations));
  s.add("map_final_value", map.report.final_value);
  s.add("map_grad_inf_norm", map.report.final_grad_inf_norm);
  if (problem.truth) s.add("map_relative_l2_error", relative_l2_error(map.x, problem.truth->values()));
  log << "map: " << to_string(map.report.status) << " after " << map.report.iterations << " iterations\n";

  if (cfg.estimator != Estimator::map) {
    const double range = std::max(dynamic_range_estimate(problem), 1e-12);
    const std::size_t n_chains = cfg.chains;
    std::vector<ChainAccumulator> accs;
    std::vector<std::vector<DiagnosticRow>> traces(n_chains);
    std::vector<std::string> failures(n_chains);
    std::vector<std::string> notes(n_chains);
    accs.reserve(n_chains);
    for (std::size_t c = 0; c < n_chains; ++c) accs.emplace_back(problem.A.pixels());

    if (cfg.estimator == Estimator::mwg) {
      const PriorModel exact_prior = smooth_prior.unsmoothed();
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chains); ++c) {
        try {
          TomographyComponentTarget target(problem.A, problem.y, exact_prior, map.x, cfg.mwg.refresh_interval);
          target.set_max_std(range);
          MwgConfig m;
          m.n_adapt = cfg.mwg.adapt;
          m.n_samples = cfg.mwg.samples;
          m.seed = chain_seed(cfg.seed, c);
          m.scale = cfg.mwg.scale;
          m.epsilon_floor = cfg.mwg.epsilon_floor > 0.0 ? cfg.mwg.epsilon_floor : 1e-8 * range;
          m.random_order = cfg.mwg.random_order;
          m.diagnostics_every = cfg.mwg.diagnostics_every;
          MwgResult r = mwg_run(target, m);
          accs[c] = std::move(r.samples);
          traces[c] = std::move(r.diagnostics);
          notes[c] = "mean_acceptance = " + format_real(r.mean_acceptance) +
                     ", stale_refreshes = " + std::to_string(target.residual().stale_refreshes());
        } catch (const std::exception& e) {
          failures[c] = e.what();
        }
      }
    } else {
      const PosteriorObjective potential(problem.A, problem.y, smooth_prior);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chains); ++c) {
        try {
          NutsConfig n;
          n.n_adapt = cfg.nuts.adapt;
          n.n_samples = cfg.nuts.samples;
          n.seed = chain_seed(cfg.seed, c);
          n.target_accept = cfg.nuts.target_accept;
          n.max_depth = cfg.nuts.max_depth;
          if (cfg.nuts.diagonal_mass) {
            NutsConfig pre = n;
            pre.n_samples = std::max<std::size_t>(cfg.nuts.adapt, 2);
            pre.seed = Rng(n.seed, 0xD1A6).next_u64();
            const ChainSummary warm = nuts_run(potential, map.x, pre).samples.finalize();
            n.inv_mass = warm.variance;
            for (double& v : n.inv_mass) v = std::max(v, 1e-12 * range * range);
          }
          NutsResult r = nuts_run(potential, map.x, n);
          accs[c] = std::move(r.samples);
          traces[c] = std::move(r.diagnostics);
          notes[c] = "step_size = " + format_real(r.step_size) + ", mean_accept_stat = " +
                     format_real(r.mean_accept_stat) + ", divergences = " + std::to_string(r.divergences);
          if (!r.warning.empty()) notes[c] += "\nWARNING: " + r.warning;
        } catch (const std::exception& e) {
          failures[c] = e.what();
        }
      }
    }

    for (std::size_t c = 0; c < n_chains; ++c) {
      const std::string name = c == 0 ? "diagnostics.csv" : "diagnostics_chain" + std::to_string(c) + ".csv";
      std::ofstream out(out_path(cfg, name), std::ios::binary);
      write_diagnostics_csv(out, traces[c]);
    }
    for (std::size_t c = 0; c < n_chains; ++c) {
      if (!failures[c].empty()) {
        write_text(out_path(cfg, "summary.txt"), s.text());
        throw NumericalError("chain " + std::to_string(c) + " failed: " + failures[c]);
      }
      log << "chain " << c << ": " << notes[c] << '\n';
      s.add("chain" + std::to_string(c), notes[c].substr(0, notes[c].find('\n')));
    }
    ChainAccumulator merged = std::move(accs[0]);
    for (std::size_t c = 1; c < n_chains; ++c) merged.merge(accs[c]);
    const ChainSummary summary = merged.finalize();
    const ImageGrid cm = image_from(problem.shape, summary.mean);
    write_image_artifact(cfg, "cm", cm, reference);
    const ImageGrid var = image_from(problem.shape, summary.variance);
    write_image(out_path(cfg, "variance"), var);
    render(cfg, "variance", var, var);
    const ImageGrid logvar = image_from(problem.shape, summary.log10_variance);
    write_image(out_path(cfg, "log10_variance"), logvar);
    render_spread(cfg, "log10_variance", logvar);
    s.add("samples", std::to_string(summary.count));
    if (problem.truth) s.add("cm_relative_l2_error", relative_l2_error(summary.mean, problem.truth->values()));
  }
  write_text(out_path(cfg, "summary.txt"), s.text());
  write_lock(cfg);
}

void run_gridsearch(RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  const Problem problem = build_problem(cfg);
  const double beta = resolve_smoothing_beta(cfg, problem);
  cfg.smoothing_beta = beta;
  if (cfg.gridsearch.parameter.empty()) cfg.gridsearch.parameter = default_search_parameter(cfg.prior.name);
  const auto& allowed = prior_parameter_names(cfg.prior.name);
  if (std::find(allowed.begin(), allowed.end(), cfg.gridsearch.parameter) == allowed.end()) {
    throw ConfigError("gridsearch.parameter '" + cfg.gridsearch.parameter + "' is not a parameter of prior '" +
                      cfg.prior.name + "'");
  }
  if (cfg.gridsearch.candidates.empty()) {
    cfg.gridsearch.candidates = log_spaced(cfg.gridsearch.lo, cfg.gridsearch.hi, cfg.gridsearch.count);
  }

  // Scored problem: the reconstruction problem itself, or a separate tuning
  // truth measured with the same geometry and noise settings.
  std::optional<ImageGrid> tuning_truth;
  if (!cfg.gridsearch.truth.empty()) {
    tuning_truth = read_image(cfg.gridsearch.truth);
  } else if (cfg.gridsearch.tuning_seed != 0) {
    if (cfg.phantom.kind != PhantomKind::log) throw ConfigError("gridsearch.tuning_seed needs a log phantom");
    PhantomSpec spec = cfg.phantom;
    spec.seed = cfg.gridsearch.tuning_seed;
    spec.metal = false;
    tuning_truth = make_log_phantom(spec);
  }
  const ImageGrid* truth = tuning_truth ? &*tuning_truth : (problem.truth ? &*problem.truth : nullptr);
  if (!truth) throw ConfigError("grid search needs a truth image (input.truth, gridsearch.truth or a phantom)");
  if (truth->shape().rows != problem.shape.rows || truth->shape().cols != problem.shape.cols) {
    throw std::runtime_error("grid search truth does not match the reconstruction grid");
  }
  Sinogram tuning_y = tuning_truth ? simulate_sinogram(*truth, problem.A, cfg.noise_fraction, cfg.resolved_noise_seed())
                                   : problem.y;

  GridSearchSpec spec{cfg.gridsearch.parameter, cfg.gridsearch.candidates,
                      std::vector<double>(truth->values().begin(), truth->values().end())};
  const RunConfig& frozen = cfg;
  const GridShape shape = problem.shape;
  const PriorFactory factory = [&frozen, shape, beta](double value) {
    RunConfig c = frozen;
    set_prior_parameter(c.prior, frozen.gridsearch.parameter, value, true);
    return configured_prior(c, shape, beta);
  };
  const GridSearchResult result = grid_search(spec, problem.A, tuning_y, factory, configured_lbfgs(cfg));

  {
    std::ofstream out(out_path(cfg, "gridsearch.csv"), std::ios::binary);
    write_error_table_csv(out, result);
    if (!out) throw std::runtime_error("cannot write gridsearch.csv");
  }
  const ImageGrid best = image_from(shape, result.best_estimate);
  write_image_artifact(cfg, "gridsearch_best", best, *truth);

  Summary s;
  s.add("command", "gridsearch");
  s.add("prior", cfg.prior.name);
  s.add("parameter", cfg.gridsearch.parameter);
  s.add("best", result.best_candidate);
  s.add("best_relative_l2_error", result.table[result.best_index].relative_error);
  s.add("smoothing_beta", beta);
  for (const auto& row : result.table) {
    if (!row.failure.empty()) s.add("failed_" + format_real(row.candidate), row.failure);
  }
  write_text(out_path(cfg, "summary.txt"), s.text());
  write_lock(cfg);
  log << "best " << cfg.gridsearch.parameter << " = " << format_real(result.best_candidate) << " (relative L2 error "
      << format_real(result.table[result.best_index].relative_error) << ")\n";
}

void run_stack(RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  if (cfg.stack_inputs.size() < 2) throw ConfigError("stack.inputs needs at least two slice images");
  std::vector<ImageGrid> slices;
  for (const auto& stem : cfg.stack_inputs) slices.push_back(read_image(stem));
  const VolumeStack volume = stack_slices(std::move(slices), cfg.stack_spacing);
  write_volume(out_path(cfg, "volume"), volume);
  write_lock(cfg);
  log << "stacked " << volume.slices.size() << " slices\n";
}

}  // namespace baytomo
