// Serial reference kernels against the OpenMP ones on a single projector.
// Usage: baytomo_bench [side] [angles] [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "baytomo/geometry.hpp"
#include "baytomo/parallel.hpp"
#include "baytomo/rng.hpp"

namespace {

double seconds(const std::function<void()>& f, int repeats) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace baytomo;
  configure_threads_from_env();
  const std::size_t side = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 128;
  const std::size_t n_angles = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 90;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 20;

  const GridShape shape{side, side, 2.0 / static_cast<double>(side)};
  const ProjectionGeometry geom = make_parallel_geometry(shape, n_angles);

  SparseOperator serial = reference::build_projector(shape, geom);
  SparseOperator parallel = build_projector(shape, geom);
  const double t_build_s = seconds([&] { serial = reference::build_projector(shape, geom); }, 3);
  const double t_build_p = seconds([&] { parallel = build_projector(shape, geom); }, 3);

  Rng rng(7);
  std::vector<double> x(parallel.pixels()), r(parallel.rays());
  for (double& v : x) v = rng.uniform();
  for (double& v : r) v = rng.normal();

  std::vector<double> ys, yp, zs, zp;
  const double t_apply_s = seconds([&] { ys = reference::apply(serial, x); }, repeats);
  const double t_apply_p = seconds([&] { yp = baytomo::apply(parallel, x); }, repeats);
  const double t_adj_s = seconds([&] { zs = reference::apply_adjoint(serial, r); }, repeats);
  const double t_adj_p = seconds([&] { zp = baytomo::apply_adjoint(parallel, r); }, repeats);

  std::printf("grid %zux%zu, %zu angles, %zu rays, %zu nonzeros, %d threads\n", side, side, n_angles, parallel.rays(),
              parallel.nonzeros(), worker_threads());
  std::printf("%-10s %12s %12s %8s %12s\n", "kernel", "serial_s", "parallel_s", "speedup", "max_diff");
  std::printf("%-10s %12.6f %12.6f %8.2f %12.3g\n", "build", t_build_s, t_build_p, t_build_s / t_build_p,
              max_abs_diff(std::vector<double>(serial.values().begin(), serial.values().end()),
                           std::vector<double>(parallel.values().begin(), parallel.values().end())));
  std::printf("%-10s %12.6f %12.6f %8.2f %12.3g\n", "apply", t_apply_s, t_apply_p, t_apply_s / t_apply_p,
              max_abs_diff(ys, yp));
  std::printf("%-10s %12.6f %12.6f %8.2f %12.3g\n", "adjoint", t_adj_s, t_adj_p, t_adj_s / t_adj_p, max_abs_diff(zs, zp));
  return 0;
}
