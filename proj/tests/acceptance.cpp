// Acceptance checks, one line per criterion. Exit status is the number of
// failed criteria. Usage: baytomo_acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "baytomo/dwt.hpp"
#include "baytomo/geometry.hpp"
#include "baytomo/hmc.hpp"
#include "baytomo/io.hpp"
#include "baytomo/lbfgs.hpp"
#include "baytomo/mwg.hpp"
#include "baytomo/objective.hpp"
#include "baytomo/phantoms.hpp"
#include "baytomo/posterior.hpp"
#include "baytomo/priors.hpp"
#include "cli_runner.hpp"
#include "oracles.hpp"

using namespace baytomo;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<PriorModel> smoothed_priors(const GridShape& s, double beta) {
  return {
      PriorModel(s, GaussianPriorParams{0.7, 0.4}),
      PriorModel(s, TvPriorParams{1.3, 0.6, false, beta}),
      PriorModel(s, TvPriorParams{1.3, 0.6, true, beta}),
      PriorModel(s, BesovPriorParams{max_dwt_levels(s.rows), 0.9, beta, nullptr}),
      PriorModel(s, CauchyPriorParams{0.3, s.pixel_size, CauchyForm::walk}),
      PriorModel(s, CauchyPriorParams{0.3, s.pixel_size, CauchyForm::sheet}),
  };
}

class StandardGaussian final : public SmoothTarget, public ComponentTarget {
 public:
  explicit StandardGaussian(std::size_t m) : x_(m, 0.0) {}
  std::size_t dimension() const override { return x_.size(); }
  double value_and_gradient(std::span<const double> x, std::span<double> g) const override {
    double f = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      g[k] = x[k];
      f += 0.5 * x[k] * x[k];
    }
    return f;
  }
  std::span<const double> state() const override { return x_; }
  double energy() const override {
    double f = 0.0;
    for (double v : x_) f += 0.5 * v * v;
    return f;
  }
  double delta_energy(std::size_t k, double v) override { return 0.5 * (v * v - x_[k] * x_[k]); }
  void accept(std::size_t k, double v) override { x_[k] = v; }

 private:
  std::vector<double> x_;
};

// 1. Operator correctness on 1000 random rays of a 64x64 grid.
Verdict operator_correctness() {
  const GridShape shape{64, 64, 1.0 / 32};
  oracle::Gen gen(101);
  ProjectionGeometry geom;
  for (int a = 0; a < 40; ++a) geom.angles.push_back(gen.uniform(0.0, std::acos(-1.0)));
  const double reach = 0.5 * std::hypot(shape.width(), shape.height());
  for (int d = 0; d < 25; ++d) geom.offsets.push_back(gen.uniform(-reach, reach));
  std::sort(geom.angles.begin(), geom.angles.end());
  std::sort(geom.offsets.begin(), geom.offsets.end());
  const auto A = build_projector(shape, geom);

  double chord_err = 0.0;
  for (std::size_t a = 0; a < geom.angle_count(); ++a) {
    for (std::size_t d = 0; d < geom.detector_count(); ++d) {
      const auto row = A.row_values(geom.ray_index(a, d));
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      chord_err = std::max(chord_err, std::abs(sum - oracle::grid_chord(shape, geom.angles[a], geom.offsets[d])));
    }
  }
  double adj_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto x = gen.normals(A.pixels()), r = gen.normals(A.rays());
    const double lhs = oracle::dot(baytomo::apply(A, x), r), rhs = oracle::dot(x, baytomo::apply_adjoint(A, r));
    adj_err = std::max(adj_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  return {A.rays() == 1000 && chord_err < 1e-10 && adj_err < 1e-10,
          std::to_string(A.rays()) + " rays, max |row sum - chord| " + fmt(chord_err) + ", adjoint mismatch " +
              fmt(adj_err) + " (limit 1e-10)"};
}

// 2. Analytic versus central-difference gradients on random 8x8 inputs.
Verdict gradient_suite() {
  const GridShape s{8, 8, 0.25};
  oracle::Gen gen(202);
  const auto A = build_projector(s, make_parallel_geometry(s, 6));
  const Sinogram y{gen.vector(A.rays(), 0.0, 2.0), 0.1, A.digest()};
  double worst = 0.0;
  std::string worst_name;
  auto check = [&](const std::string& name, const std::function<double(std::span<const double>, std::span<double>)>& f) {
    for (int t = 0; t < 10; ++t) {
      const auto x = gen.normals(64);
      std::vector<double> g(64), tmp(64);
      f(x, g);
      const auto fd = oracle::fd_gradient([&](std::span<const double> v) { return f(v, tmp); }, x);
      const double e = oracle::relative_error(g, fd);
      if (e > worst) worst = e, worst_name = name;
    }
  };
  check("likelihood", [&](std::span<const double> x, std::span<double> g) {
    return likelihood_value_and_gradient(A, y, x, g);
  });
  for (const auto& p : smoothed_priors(s, 0.01)) {
    check(p.name(), [&](std::span<const double> x, std::span<double> g) { return p.energy_and_gradient(x, g); });
  }
  return {worst < 1e-5, "likelihood + 6 priors x 10 inputs, worst relative error " + fmt(worst) + " (" + worst_name +
                            ", limit 1e-5)"};
}

// 3. Haar transform on 64x64 and the Besov energy against a recursive oracle.
Verdict dwt_suite() {
  const std::size_t side = 64, n = side * side, levels = max_dwt_levels(side);
  const DwtOperator dwt(side, levels);
  Eigen::MatrixXd D(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    const auto col = dwt.analyze(e);
    for (std::size_t i = 0; i < n; ++i) D(Eigen::Index(i), Eigen::Index(k)) = col[i];
    e[k] = 0.0;
  }
  const Eigen::MatrixXd gram = D.transpose() * D;
  const double ortho = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();

  oracle::Gen gen(303);
  const auto x = gen.normals(n);
  const auto back = dwt.synthesize(dwt.analyze(x));
  double recon = 0.0;
  for (std::size_t k = 0; k < n; ++k) recon = std::max(recon, std::abs(back[k] - x[k]));

  const PriorModel besov(GridShape{side, side, 1.0}, BesovPriorParams{levels, 1.3, 0.0, nullptr});
  double ref = 0.0;
  for (double w : oracle::recursive_haar(x, side, levels)) ref += 1.3 * std::abs(w);
  const double energy_err = std::abs(besov.energy(x) - ref);
  return {ortho < 1e-12 && recon < 1e-12 && energy_err < 1e-10,
          "max |D'D - I| " + fmt(ortho) + ", reconstruction " + fmt(recon) + " (limit 1e-12), Besov vs oracle " +
              fmt(energy_err) + " (limit 1e-10)"};
}

// 4. Single-pixel deltas against full recomputation; Besov cache drift.
Verdict delta_equivalence() {
  const GridShape s{16, 16, 0.125};
  oracle::Gen gen(404);
  double worst = 0.0;
  for (const auto& p : smoothed_priors(s, 0.0)) {
    auto x = gen.vector(s.size(), 0.0, 2.0);
    PriorDeltaCache cache(p, x);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t k = gen.index(s.size());
      const double v = x[k] + 0.5 * gen.normal();
      auto xn = x;
      xn[k] = v;
      const double full = p.energy(xn) - p.energy(x);
      worst = std::max(worst, std::abs(p.delta_energy(x, s.pixel(k), v) - full));
      worst = std::max(worst, std::abs(cache.delta(x, k, v) - full));
      if (t % 2 == 0) {
        cache.accept(k, x[k], v);
        x = xn;
      }
    }
  }
  const PriorModel besov(s, BesovPriorParams{4, 1.0, 0.0, nullptr});
  auto x = gen.vector(s.size(), 0.0, 2.0);
  PriorDeltaCache cache(besov, x);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = gen.index(s.size());
    const double v = x[k] + 0.3 * gen.normal();
    cache.accept(k, x[k], v);
    x[k] = v;
  }
  const auto fresh = DwtOperator(16, 4).analyze(x);
  double drift = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) drift = std::max(drift, std::abs(fresh[i] - cache.coefficients()[i]));
  return {worst < 1e-9 && drift < 1e-9, "6 priors x 1000 proposals, worst |delta - full| " + fmt(worst) +
                                            "; Besov cache drift after 1e4 accepts " + fmt(drift) + " (limit 1e-9)"};
}

// 5. Gaussian posterior on 4x4 with 4 angles: MAP and both sampler means
// against the normal equations.
Verdict gaussian_end_to_end() {
  const GridShape shape{4, 4, 0.5};
  const auto geom = make_parallel_geometry(shape, 4);
  const auto A = build_projector(shape, geom);
  ImageGrid truth(shape);
  for (std::size_t i = 1; i < 3; ++i) {
    for (std::size_t j = 1; j < 3; ++j) truth(i, j) = 1.0;
  }
  const Sinogram y = simulate_sinogram(truth, A, 0.015, 505);
  const PriorModel prior(shape, GaussianPriorParams{0.8, 0.8});
  const Eigen::MatrixXd M = oracle::dense_projector(shape, geom);
  const double s2 = y.noise_sigma * y.noise_sigma;
  const Eigen::MatrixXd H = M.transpose() * M / s2 + oracle::gaussian_hessian(shape, 0.8, 0.8);
  const Eigen::VectorXd solution = H.ldlt().solve(M.transpose() * oracle::to_eigen(y.values) / s2);

  const PosteriorObjective post(A, y, prior);
  LbfgsConfig lc;
  lc.grad_tol = 1e-12;
  const auto map = lbfgs_minimize(post, lc, std::vector<double>(16, 0.0));
  double map_err = 0.0;
  for (std::size_t k = 0; k < 16; ++k) map_err = std::max(map_err, std::abs(map.x[k] - solution(Eigen::Index(k))));

  TomographyComponentTarget ct(A, y, prior, map.x);
  MwgConfig mc;
  // Single-site updates mix slowly on this correlated posterior (lag-one
  // autocorrelation near 0.998), hence the long chain.
  mc.n_adapt = 10000;
  mc.n_samples = 1000000;
  mc.seed = 5;
  const auto mwg = mwg_run(ct, mc);
  NutsConfig nc;
  nc.n_adapt = 100;
  nc.n_samples = 4000;
  nc.seed = 5;
  const auto nuts = nuts_run(post, map.x, nc);

  auto worst_z = [&](const ChainAccumulator& acc) {
    const auto s = acc.finalize();
    const auto se = acc.batch_means_standard_error();
    double z = 0.0;
    for (std::size_t k = 0; k < 16; ++k) z = std::max(z, std::abs(s.mean[k] - solution(Eigen::Index(k))) / se[k]);
    return z;
  };
  const double z_mwg = worst_z(mwg.samples), z_nuts = worst_z(nuts.samples);
  return {map_err < 1e-6 && z_mwg < 3 && z_nuts < 3,
          "MAP max error " + fmt(map_err) + " (limit 1e-6); CM max |error|/MCSE: MwG " + fmt(z_mwg) + ", NUTS " +
              fmt(z_nuts) + " (limit 3)"};
}

// 6. Sampler calibration on a 64-dimensional standard Gaussian. The NUTS
// acceptance statistic is pooled over 8 independent chains, each adapted
// for exactly 100 iterations.
Verdict sampler_calibration() {
  StandardGaussian t(64);
  double pooled = 0.0, lo = 1.0, hi = 0.0;
  const int chains = 8;
  for (int c = 0; c < chains; ++c) {
    NutsConfig cfg;
    cfg.n_adapt = 100;
    cfg.n_samples = 1000;
    cfg.seed = 600 + std::uint64_t(c);
    Rng init(cfg.seed, 1);
    std::vector<double> x0(64);
    for (double& v : x0) v = init.normal();
    const auto r = nuts_run(t, x0, cfg);
    pooled += r.mean_accept_stat / chains;
    lo = std::min(lo, r.mean_accept_stat);
    hi = std::max(hi, r.mean_accept_stat);
  }
  MwgConfig mc;
  mc.n_adapt = 5000;
  mc.n_samples = 20000;
  mc.seed = 606;
  const auto mwg = mwg_run(t, mc);
  const auto [amin, amax] = std::minmax_element(mwg.acceptance.begin(), mwg.acceptance.end());
  return {std::abs(pooled - 0.8) < 0.05 && *amin >= 0.2 && *amax <= 0.6,
          "NUTS mean accept stat " + fmt(pooled) + " (target 0.8 +- 0.05; per chain " + fmt(lo) + ".." + fmt(hi) +
              "); MwG acceptance " + fmt(*amin) + ".." + fmt(*amax) + " (limit [0.2, 0.6])"};
}

// 7. Leapfrog reversibility and energy drift.
Verdict leapfrog_checks() {
  StandardGaussian osc(1);
  std::vector<double> x{1.0}, p{0.5}, g{1.0}, inv{1.0};
  const double h0 = 0.5 + kinetic_energy(p, inv);
  const double u = leapfrog(osc, x, p, g, 0.01, inv, 1000);
  const double drift = std::abs(u + kinetic_energy(p, inv) - h0);
  p[0] = -p[0];
  leapfrog(osc, x, p, g, 0.01, inv, 1000);
  double rev = std::max(std::abs(x[0] - 1.0), std::abs(-p[0] - 0.5));

  const GridShape s{8, 8, 0.25};
  oracle::Gen gen(707);
  const auto A = build_projector(s, make_parallel_geometry(s, 5));
  const Sinogram y = simulate_sinogram(ImageGrid(s, gen.vector(64, 0.0, 1.0)), A, 0.02, 7);
  for (const auto& prior : smoothed_priors(s, 0.05)) {
    const PosteriorObjective post(A, y, prior);
    const auto x0 = gen.vector(64, 0.0, 1.0), p0 = gen.normals(64);
    std::vector<double> xs = x0, ps = p0, gs(64), ones(64, 1.0);
    post.value_and_gradient(xs, gs);
    leapfrog(post, xs, ps, gs, 1e-3, ones, 50);
    for (double& v : ps) v = -v;
    leapfrog(post, xs, ps, gs, 1e-3, ones, 50);
    for (std::size_t k = 0; k < 64; ++k) rev = std::max({rev, std::abs(xs[k] - x0[k]), std::abs(ps[k] + p0[k])});
  }
  return {rev < 1e-10 && drift < 1e-4, "reversibility error " + fmt(rev) + " (limit 1e-10, oscillator + 6 posteriors); |dH| " +
                                           fmt(drift) + " over 1000 steps (limit 1e-4)"};
}

std::string summary_value(const fs::path& dir, const std::string& key) {
  std::istringstream in(clirun::slurp(dir / "summary.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  throw std::runtime_error("summary.txt in " + dir.string() + " has no " + key);
}

void cli(const std::string& args) {
  const auto r = clirun::run(args);
  if (r.exit_code != 0) throw std::runtime_error("baytomo " + args + " exited with " + std::to_string(r.exit_code) + ": " + r.output);
}

// Grid search on a separate metal-free tuning slice, then MAP on the target.
double tuned_map(const fs::path& root, const std::string& prior, const std::string& base, double* best = nullptr) {
  const fs::path dir = root / prior;
  fs::create_directories(dir);
  clirun::write_file(dir / "search.ini", base + "[prior]\nname = " + prior + "\n[gridsearch]\ntuning_seed = 77\ncount = 13\n");
  cli("gridsearch --config " + (dir / "search.ini").string() + " --out " + (dir / "search").string());
  const std::string param = summary_value(dir / "search", "parameter"), value = summary_value(dir / "search", "best");
  if (best) *best = std::stod(value);
  clirun::write_file(dir / "map.ini", base + "[prior]\nname = " + prior + "\n" + param + " = " + value + "\n");
  cli("map --config " + (dir / "map.ini").string() + " --out " + (dir / "map").string());
  return std::stod(summary_value(dir / "map", "map_relative_l2_error"));
}

// 8. Reconstruction ordering at 10 angles on the 64x64 log phantom.
Verdict reconstruction_ordering(const fs::path& root) {
  const std::string base = "[geometry]\nangles = 10\n[noise]\nfraction = 0.015\n";
  const double e_gauss = tuned_map(root, "gaussian", base);
  const double e_tv = tuned_map(root, "tv", base);
  const double e_cauchy = tuned_map(root, "cauchy", base);

  const auto rec = read_image(root / "cauchy" / "map" / "map");
  const PhantomSpec spec;
  const auto labels = log_phantom_labels(spec);
  double metal_max = -1e300;
  std::vector<double> wood;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    if (labels[k] == Material::metal) metal_max = std::max(metal_max, rec.values()[k]);
    if (labels[k] == Material::wood) wood.push_back(rec.values()[k]);
  }
  std::nth_element(wood.begin(), wood.begin() + std::ptrdiff_t(wood.size() / 2), wood.end());
  const double plateau = wood[wood.size() / 2];
  return {e_cauchy < e_gauss && e_tv < e_gauss && metal_max > 2 * plateau,
          "relative L2 error Gaussian " + fmt(e_gauss) + ", TV " + fmt(e_tv) + ", Cauchy " + fmt(e_cauchy) +
              "; Cauchy metal max " + fmt(metal_max) + " vs 2 x wood plateau " + fmt(2 * plateau)};
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = double(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// 9. Log-variance maps of MwG and NUTS on the 64x64 TV posterior at 90 angles.
Verdict variance_maps(const fs::path& root) {
  const std::string base = "[geometry]\nangles = 90\n[noise]\nfraction = 0.015\n";
  double alpha = 0.0;
  tuned_map(root, "tv", base, &alpha);
  const std::string cfg = base + "[prior]\nname = tv\nalpha = " + std::to_string(alpha) +
                          "\n[mwg]\nadapt = 50000\nsamples = 40000\n[nuts]\nadapt = 100\nsamples = 4000\n";
  clirun::write_file(root / "sample.ini", cfg);
  cli("sample --estimator mwg --config " + (root / "sample.ini").string() + " --out " + (root / "mwg").string());
  cli("sample --estimator nuts --config " + (root / "sample.ini").string() + " --out " + (root / "nuts").string());
  const auto a = read_image(root / "mwg" / "log10_variance"), b = read_image(root / "nuts" / "log10_variance");
  const double r = pearson(a.values(), b.values());
  return {r > 0.8, "alpha " + fmt(alpha) + ", Pearson correlation of log10 variance maps " + fmt(r) + " (limit 0.8)"};
}

// 10. Each command re-run from its run.lock reproduces every raw output.
Verdict lock_reproducibility(const fs::path& root) {
  const std::string small = "[phantom]\nside = 32\n[geometry]\nangles = 12\n";
  clirun::write_file(root / "small.ini", small);
  clirun::write_file(root / "mwg.ini", small + "[run]\nchains = 2\n[prior]\nname = tv\n[mwg]\nadapt = 200\nsamples = 300\n");
  clirun::write_file(root / "nuts.ini", small + "[prior]\nname = cauchy\n[nuts]\nadapt = 30\nsamples = 40\n");
  clirun::write_file(root / "grid.ini", small + "[prior]\nname = besov\n[gridsearch]\ncount = 4\ntuning_seed = 3\n");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate", "simulate --config " + (root / "small.ini").string()},
      {"map", "map --prior tv --config " + (root / "small.ini").string()},
      {"mwg", "sample --estimator mwg --config " + (root / "mwg.ini").string()},
      {"nuts", "sample --estimator nuts --config " + (root / "nuts.ini").string()},
      {"gridsearch", "gridsearch --config " + (root / "grid.ini").string()},
  };
  std::size_t compared = 0;
  std::vector<std::string> mismatched;
  auto compare = [&](const fs::path& a, const fs::path& b) {
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".raw") continue;
      ++compared;
      if (clirun::slurp(entry.path()) != clirun::slurp(b / entry.path().filename())) {
        mismatched.push_back(a.filename().string() + "/" + entry.path().filename().string());
      }
    }
  };
  for (const auto& [name, args] : runs) {
    const fs::path first = root / (name + "_1"), second = root / (name + "_2");
    cli(args + " --out " + first.string());
    const std::string cmd = name == "mwg" || name == "nuts" ? "sample" : name;
    cli(cmd + " --config " + (first / "run.lock").string() + " --out " + second.string());
    compare(first, second);
  }
  clirun::write_file(root / "stack.ini", "[stack]\ninputs = " + (root / "map_1" / "map").string() + ", " +
                                             (root / "map_1" / "truth").string() + "\n");
  cli("stack --config " + (root / "stack.ini").string() + " --out " + (root / "stack_1").string());
  cli("stack --config " + (root / "stack_1" / "run.lock").string() + " --out " + (root / "stack_2").string());
  compare(root / "stack_1", root / "stack_2");

  std::string detail = std::to_string(compared) + " raw files over 6 commands";
  for (const auto& m : mismatched) detail += ", differs: " + m;
  return {mismatched.empty() && compared >= 15, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = fs::current_path() / "acceptance_runs";
  fs::remove_all(root);
  fs::create_directories(root);

  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "operator correctness", 5, operator_correctness},
      {2, "gradient suite", 10, gradient_suite},
      {3, "DWT suite", 0, dwt_suite},
      {4, "delta-update equivalence", 0, delta_equivalence},
      {5, "Gaussian end-to-end oracle", 120, gaussian_end_to_end},
      {6, "sampler calibration", 0, sampler_calibration},
      {7, "leapfrog reversibility and energy drift", 0, leapfrog_checks},
      {8, "desk-scale reconstruction ordering", 900, [&] { return reconstruction_ordering(root / "c8"); }},
      {9, "variance-map pipeline", 1800, [&] { return variance_maps(root / "c9"); }},
      {10, "reproducibility from run.lock", 0, [&] { return lock_reproducibility(root / "c10"); }},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    fs::create_directories(root / ("c" + std::to_string(c.id)));
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt(secs) + " s";
    if (c.limit_s > 0) {
      timing += ", limit " + fmt(c.limit_s) + " s";
      if (secs > c.limit_s) v.pass = false;
    }
    failures += !v.pass;
    std::printf("criterion %2d %s: %s; %s [%s]\n", c.id, v.pass ? "PASS" : "FAIL", c.name.c_str(), v.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  return failures;
}
