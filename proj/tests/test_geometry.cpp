#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "baytomo/geometry.hpp"
#include "oracles.hpp"

using namespace baytomo;

namespace {

SparseOperator single_ray(const GridShape& shape, double angle, double offset) {
  return build_projector(shape, ProjectionGeometry{{angle}, {offset}});
}

double row_sum(const SparseOperator& A, std::size_t r) {
  double s = 0.0;
  for (double v : A.row_values(r)) s += v;
  return s;
}

}  // namespace

TEST(Projector, HorizontalRayThroughTopRowHasTwoUnitEntries) {
  // Angle 0 means the ray runs along y at x = s, so use pi/2 for a row.
  const GridShape shape{2, 2, 1.0};
  const auto A = single_ray(shape, std::numbers::pi / 2, 0.5);
  ASSERT_EQ(A.row_cols(0).size(), 2u);
  EXPECT_EQ(A.row_cols(0)[0], 0u);
  EXPECT_EQ(A.row_cols(0)[1], 1u);
  EXPECT_NEAR(A.row_values(0)[0], 1.0, 1e-14);
  EXPECT_NEAR(A.row_values(0)[1], 1.0, 1e-14);
}

TEST(Projector, AxisAlignedColumnRayAtAngleZero) {
  const GridShape shape{2, 2, 1.0};
  const auto A = single_ray(shape, 0.0, -0.5);
  ASSERT_EQ(A.row_cols(0).size(), 2u);
  EXPECT_EQ(A.row_cols(0)[0], 0u);
  EXPECT_EQ(A.row_cols(0)[1], 2u);
  EXPECT_NEAR(row_sum(A, 0), 2.0, 1e-14);
}

TEST(Projector, DiagonalThroughCentreSumsToFullDiagonal) {
  const GridShape shape{2, 2, 1.0};
  const auto A = single_ray(shape, std::numbers::pi / 4, 0.0);
  EXPECT_NEAR(row_sum(A, 0), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(Projector, RayMissingTheGridIsEmpty) {
  const GridShape shape{4, 4, 1.0};
  const auto A = single_ray(shape, 0.3, 5.0);
  EXPECT_TRUE(A.row_cols(0).empty());
}

TEST(Projector, RowSumsMatchChordOn8x8) {
  const GridShape shape{8, 8, 1.0};
  ProjectionGeometry geom;
  for (int a = 0; a < 4; ++a) geom.angles.push_back(a * std::numbers::pi / 4 + 0.1);
  for (int d = 0; d < 11; ++d) geom.offsets.push_back(-5.0 + d);
  const auto A = build_projector(shape, geom);
  for (std::size_t a = 0; a < geom.angles.size(); ++a) {
    for (std::size_t d = 0; d < geom.offsets.size(); ++d) {
      const std::size_t r = geom.ray_index(a, d);
      EXPECT_NEAR(row_sum(A, r), oracle::grid_chord(shape, geom.angles[a], geom.offsets[d]), 1e-10);
    }
  }
}

TEST(Projector, MatchesPixelByPixelClippingOracle) {
  const GridShape shape{6, 5, 0.7};
  const auto geom = make_parallel_geometry(shape, 7, 9);
  const auto A = build_projector(shape, geom);
  const Eigen::MatrixXd D = oracle::dense_projector(shape, geom);
  for (std::size_t r = 0; r < A.rays(); ++r) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.pixels()));
    const auto cols = A.row_cols(r);
    const auto vals = A.row_values(r);
    for (std::size_t e = 0; e < cols.size(); ++e) row(cols[e]) = vals[e];
    EXPECT_LT((row - D.row(static_cast<Eigen::Index>(r)).transpose()).cwiseAbs().maxCoeff(), 1e-10) << "ray " << r;
  }
}

TEST(Projector, InvariantsHoldOnRandomGeometries) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const GridShape shape{2 + gen.index(12), 2 + gen.index(12), gen.uniform(0.1, 2.0)};
    const auto geom = make_parallel_geometry(shape, 1 + gen.index(12), 1 + gen.index(20));
    const auto A = build_projector(shape, geom);
    const double diag = shape.pixel_size * std::hypot(double(shape.rows), double(shape.cols));
    for (std::size_t r = 0; r < A.rays(); ++r) {
      const auto cols = A.row_cols(r);
      const auto vals = A.row_values(r);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        EXPECT_GT(vals[e], 0.0);
        EXPECT_LE(vals[e], diag + 1e-12);
        if (e > 0) EXPECT_LT(cols[e - 1], cols[e]);
      }
    }
    for (std::size_t d = 0; d < geom.offsets.size(); ++d) {
      EXPECT_DOUBLE_EQ(geom.offsets[d], -geom.offsets[geom.offsets.size() - 1 - d]);
      if (d > 0) EXPECT_LT(geom.offsets[d - 1], geom.offsets[d]);
    }
    for (std::size_t a = 0; a < geom.angles.size(); ++a) {
      EXPECT_GE(geom.angles[a], 0.0);
      EXPECT_LT(geom.angles[a], std::numbers::pi);
    }
  }
}

TEST(Projector, DefaultsCoverCircumscribedCircle) {
  const GridShape shape{16, 16, 0.125};
  const auto geom = make_parallel_geometry(shape, 10);
  EXPECT_EQ(geom.detector_count(), 16u);
  EXPECT_DOUBLE_EQ(geom.angles.front(), 0.0);
  EXPECT_NEAR(geom.angles[1], std::numbers::pi / 10, 1e-15);
  const double radius = std::hypot(shape.width(), shape.height()) / 2.0;
  EXPECT_LE(geom.offsets.back(), radius);
  EXPECT_GT(geom.offsets.back(), radius * 0.8);
}

TEST(Projector, RejectsEmptyAndUnorderedGeometry) {
  const GridShape shape{4, 4, 1.0};
  EXPECT_THROW(build_projector(shape, ProjectionGeometry{{}, {0.0}}), std::invalid_argument);
  EXPECT_THROW(build_projector(shape, ProjectionGeometry{{0.0}, {}}), std::invalid_argument);
  EXPECT_THROW(build_projector(shape, ProjectionGeometry{{0.5, 0.1}, {0.0}}), std::invalid_argument);
}

TEST(Projector, SerialReferenceMatchesParallelBitForBit) {
  const GridShape shape{24, 20, 0.1};
  const auto geom = make_parallel_geometry(shape, 13, 31);
  const auto P = build_projector(shape, geom);
  const auto S = reference::build_projector(shape, geom);
  ASSERT_EQ(P.nonzeros(), S.nonzeros());
  for (std::size_t e = 0; e < P.nonzeros(); ++e) {
    EXPECT_EQ(P.col_idx()[e], S.col_idx()[e]);
    EXPECT_EQ(P.values()[e], S.values()[e]);
  }
  EXPECT_EQ(P.digest(), S.digest());
  oracle::Gen gen(3);
  const auto x = gen.vector(P.pixels());
  const auto r = gen.vector(P.rays());
  const auto yp = baytomo::apply(P, x), ys = reference::apply(S, x);
  for (std::size_t i = 0; i < yp.size(); ++i) EXPECT_EQ(yp[i], ys[i]);
  const auto zp = baytomo::apply_adjoint(P, r), zs = reference::apply_adjoint(S, r);
  for (std::size_t i = 0; i < zp.size(); ++i) EXPECT_NEAR(zp[i], zs[i], 1e-12 * (1.0 + std::abs(zs[i])));
}

TEST(Apply, ZeroAndIndicatorAndMismatch) {
  const GridShape shape{5, 5, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 4));
  const auto zero = baytomo::apply(A, std::vector<double>(A.pixels(), 0.0));
  for (double v : zero) EXPECT_EQ(v, 0.0);
  std::vector<double> e(A.pixels(), 0.0);
  e[7] = 1.0;
  const auto col = baytomo::apply(A, e);
  std::vector<double> expected(A.rays(), 0.0);
  const auto rows = A.column_rows(7);
  const auto vals = A.column_values(7);
  for (std::size_t i = 0; i < rows.size(); ++i) expected[rows[i]] = vals[i];
  for (std::size_t i = 0; i < col.size(); ++i) EXPECT_EQ(col[i], expected[i]);
  EXPECT_THROW(baytomo::apply(A, std::vector<double>(3)), std::invalid_argument);
  EXPECT_THROW(baytomo::apply_adjoint(A, std::vector<double>(3)), std::invalid_argument);
}

TEST(Apply, MatchesDenseOracle) {
  const GridShape shape{7, 7, 0.3};
  const auto geom = make_parallel_geometry(shape, 5);
  const auto A = build_projector(shape, geom);
  const Eigen::MatrixXd D = oracle::dense_projector(shape, geom);
  oracle::Gen gen(5);
  const auto x = gen.vector(A.pixels());
  const auto r = gen.vector(A.rays());
  const Eigen::VectorXd y = D * oracle::to_eigen(x);
  const Eigen::VectorXd z = D.transpose() * oracle::to_eigen(r);
  const auto ya = baytomo::apply(A, x), za = baytomo::apply_adjoint(A, r);
  for (std::size_t i = 0; i < ya.size(); ++i) EXPECT_NEAR(ya[i], y(i), 1e-10);
  for (std::size_t i = 0; i < za.size(); ++i) EXPECT_NEAR(za[i], z(i), 1e-10);
}

TEST(Adjoint, IndicatorScattersRow) {
  const GridShape shape{5, 5, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 3));
  std::vector<double> r(A.rays(), 0.0);
  r[6] = 1.0;
  const auto z = baytomo::apply_adjoint(A, r);
  std::vector<double> expected(A.pixels(), 0.0);
  for (std::size_t e = 0; e < A.row_cols(6).size(); ++e) expected[A.row_cols(6)[e]] = A.row_values(6)[e];
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_EQ(z[k], expected[k]);
}

TEST(Adjoint, IdentityHoldsForRandomVectors) {
  oracle::Gen gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const GridShape shape{3 + gen.index(20), 3 + gen.index(20), gen.uniform(0.05, 1.0)};
    const auto A = build_projector(shape, make_parallel_geometry(shape, 1 + gen.index(15)));
    const auto x = gen.normals(A.pixels());
    const auto r = gen.normals(A.rays());
    const double lhs = oracle::dot(baytomo::apply(A, x), r);
    const double rhs = oracle::dot(x, baytomo::apply_adjoint(A, r));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(lhs)));
  }
}

TEST(Projector, DiskSinogramIsIdenticalAcrossSquareSymmetricAngles) {
  // A pixelized disk is only invariant under the symmetries of the square
  // lattice, so compare angles related by quarter turns and reflections.
  const GridShape shape{32, 32, 1.0 / 16};
  ImageGrid disk(shape);
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 32; ++j) {
      const double x = (j + 0.5) / 16 - 1.0, y = 1.0 - (i + 0.5) / 16;
      disk(i, j) = std::hypot(x, y) < 0.7 ? 1.0 : 0.0;
    }
  }
  const auto geom = make_parallel_geometry(shape, 4);
  const auto y = baytomo::apply(build_projector(shape, geom), disk.values());
  const std::size_t nd = geom.detector_count();
  for (std::size_t d = 0; d < nd; ++d) {
    EXPECT_NEAR(y[geom.ray_index(0, d)], y[geom.ray_index(2, d)], 1e-8);
    EXPECT_NEAR(y[geom.ray_index(1, d)], y[geom.ray_index(3, d)], 1e-8);
  }
}

TEST(Simulate, SigmaIsFractionOfMaxLineIntegral) {
  // One ray through a 10-long column of unit pixels: max line integral 10.
  const GridShape shape{10, 1, 1.0};
  const auto A = build_projector(shape, ProjectionGeometry{{0.0}, {0.0}});
  const ImageGrid truth(shape, std::vector<double>(10, 1.0));
  const auto y = simulate_sinogram(truth, A, 0.015, 4);
  EXPECT_NEAR(y.noise_sigma, 0.15, 1e-14);
  EXPECT_EQ(y.geometry_digest, A.digest());
}

TEST(Simulate, SeedDeterminesBytes) {
  const GridShape shape{8, 8, 0.25};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 5));
  const ImageGrid truth(shape, std::vector<double>(64, 0.5));
  const auto a = simulate_sinogram(truth, A, 0.02, 99);
  const auto b = simulate_sinogram(truth, A, 0.02, 99);
  const auto c = simulate_sinogram(truth, A, 0.02, 100);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Simulate, EmpiricalNoiseStdMatchesSigma) {
  const GridShape shape{4, 4, 1.0};
  const auto A = build_projector(shape, ProjectionGeometry{{0.3}, {0.2}});
  const ImageGrid truth(shape, std::vector<double>(16, 1.0));
  const double clean = baytomo::apply(A, truth.values())[0];
  double sum = 0.0, sum2 = 0.0, sigma = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const auto y = simulate_sinogram(truth, A, 0.015, static_cast<std::uint64_t>(s) + 1);
    const double e = y.values[0] - clean;
    sum += e;
    sum2 += e * e;
    sigma = y.noise_sigma;
  }
  const double sd = std::sqrt((sum2 - sum * sum / n) / (n - 1));
  EXPECT_NEAR(sd / sigma, 1.0, 0.02);
}

TEST(Simulate, RejectsZeroProjections) {
  const GridShape shape{4, 4, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 3));
  EXPECT_THROW(simulate_sinogram(ImageGrid(shape), A, 0.015, 1), std::invalid_argument);
  EXPECT_THROW(simulate_sinogram(ImageGrid(shape, std::vector<double>(16, 1.0)), A, 0.0, 1), std::invalid_argument);
}

TEST(Likelihood, ZeroAtExactDataAndQuadraticAlgebra) {
  const GridShape shape{6, 6, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 4));
  oracle::Gen gen(2);
  const auto x = gen.vector(A.pixels(), 0.0, 1.0);
  Sinogram y{baytomo::apply(A, x), 0.3, A.digest()};
  EXPECT_EQ(likelihood_neglog(A, y, x), 0.0);
  for (double g : likelihood_grad(A, y, x)) EXPECT_EQ(g, 0.0);

  // u with ||u||^2 = n gives n / 2.
  auto u = gen.normals(A.rays());
  const double norm = std::sqrt(oracle::dot(u, u));
  for (double& v : u) v *= std::sqrt(double(A.rays())) / norm;
  for (std::size_t i = 0; i < u.size(); ++i) y.values[i] += y.noise_sigma * u[i];
  EXPECT_NEAR(likelihood_neglog(A, y, x), A.rays() / 2.0, 1e-9);
}

TEST(Likelihood, GradientMatchesFiniteDifferences) {
  const GridShape shape{5, 5, 0.5};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 6));
  oracle::Gen gen(8);
  const Sinogram y{gen.vector(A.rays(), 0.0, 2.0), 0.2, A.digest()};
  const auto x = gen.vector(A.pixels());
  const auto g = likelihood_grad(A, y, x);
  const auto fd = oracle::fd_gradient([&](std::span<const double> v) { return likelihood_neglog(A, y, v); }, x);
  EXPECT_LT(oracle::relative_error(g, fd), 1e-6);
  std::vector<double> g2(A.pixels());
  EXPECT_DOUBLE_EQ(likelihood_value_and_gradient(A, y, x, g2), likelihood_neglog(A, y, x));
  EXPECT_EQ(g2, g);
}

TEST(Likelihood, GradientEqualsAdjointOfResidualExactly) {
  const GridShape shape{12, 12, 1.0 / 6.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 17));
  oracle::Gen gen(21);
  const Sinogram y{gen.vector(A.rays(), 0.0, 3.0), 0.05, A.digest()};
  const auto x = gen.vector(A.pixels());
  auto residual = baytomo::apply(A, x);
  double sum = 0.0;
  for (std::size_t r = 0; r < residual.size(); ++r) {
    residual[r] = y.values[r] - residual[r];
    sum += residual[r] * residual[r];
  }
  auto expected = baytomo::apply_adjoint(A, residual);
  const double inv_var = 1.0 / (y.noise_sigma * y.noise_sigma);
  for (double& g : expected) g *= -inv_var;
  std::vector<double> g(A.pixels());
  EXPECT_EQ(likelihood_value_and_gradient(A, y, x, g), 0.5 * sum * inv_var);
  EXPECT_EQ(g, expected);
}

TEST(Likelihood, IsConvexAlongRandomSegments) {
  const GridShape shape{6, 6, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 3));
  oracle::Gen gen(21);
  const Sinogram y{gen.vector(A.rays()), 0.5, A.digest()};
  for (int trial = 0; trial < 200; ++trial) {
    const auto x1 = gen.vector(A.pixels(), -3, 3), x2 = gen.vector(A.pixels(), -3, 3);
    const double t = gen.uniform(0.0, 1.0);
    std::vector<double> xt(x1.size());
    for (std::size_t k = 0; k < xt.size(); ++k) xt[k] = t * x1[k] + (1 - t) * x2[k];
    EXPECT_LE(likelihood_neglog(A, y, xt),
              t * likelihood_neglog(A, y, x1) + (1 - t) * likelihood_neglog(A, y, x2) + 1e-10);
  }
}

TEST(Likelihood, RejectsDimensionMismatch) {
  const GridShape shape{4, 4, 1.0};
  const auto A = build_projector(shape, make_parallel_geometry(shape, 3));
  const Sinogram y{std::vector<double>(A.rays(), 1.0), 1.0, A.digest()};
  EXPECT_THROW(likelihood_neglog(A, y, std::vector<double>(5)), std::invalid_argument);
  const Sinogram bad{std::vector<double>(2, 1.0), 1.0, A.digest()};
  EXPECT_THROW(likelihood_neglog(A, bad, std::vector<double>(16)), std::invalid_argument);
}
