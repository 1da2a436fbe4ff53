#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "baytomo/grid.hpp"

namespace baytomo {

/// Parallel-beam acquisition: ray (a, d) is the line
/// x*cos(angles[a]) + y*sin(angles[a]) = offsets[d].
struct ProjectionGeometry {
  std::vector<double> angles;
  std::vector<double> offsets;

  std::size_t angle_count() const { return angles.size(); }
  std::size_t detector_count() const { return offsets.size(); }
  std::size_t ray_count() const { return angles.size() * offsets.size(); }
  std::size_t ray_index(std::size_t angle, std::size_t detector) const { return angle * offsets.size() + detector; }

  void validate() const;
};

/// Equispaced angles on [0, pi) starting at 0, detector bins of equal width
/// covering the circle circumscribing the grid. detector_count == 0 means
/// one bin per grid column.
ProjectionGeometry make_parallel_geometry(const GridShape& shape, std::size_t n_angles,
                                          std::size_t detector_count = 0);

/// Stable 64-bit fingerprint of (grid shape, angles, offsets).
std::uint64_t geometry_digest(const GridShape& shape, const ProjectionGeometry& geom);

struct RowEntry {
  std::uint32_t col;
  double value;
};

/// Intersection lengths of one line with every pixel it crosses, sorted by
/// pixel index. Empty when the line misses the grid.
std::vector<RowEntry> trace_ray(const GridShape& shape, double angle, double offset);

/// Length of the line clipped to the grid bounding box.
double clipped_chord_length(const GridShape& shape, double angle, double offset);

/// System matrix A in compressed sparse row layout. A transposed copy (CSC)
/// is kept alongside for column access and gather-style adjoints.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::size_t n_rays, std::size_t n_pixels, std::vector<std::size_t> row_ptr,
                 std::vector<std::uint32_t> col_idx, std::vector<double> values, std::uint64_t digest = 0);

  std::size_t rays() const { return n_rays_; }
  std::size_t pixels() const { return n_pixels_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::uint64_t digest() const { return digest_; }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::uint32_t> row_cols(std::size_t r) const {
    return std::span(col_idx_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
  }
  std::span<const double> row_values(std::size_t r) const {
    return std::span(values_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
  }
  std::span<const std::uint32_t> column_rows(std::size_t k) const {
    return std::span(csc_rows_).subspan(col_ptr_[k], col_ptr_[k + 1] - col_ptr_[k]);
  }
  std::span<const double> column_values(std::size_t k) const {
    return std::span(csc_values_).subspan(col_ptr_[k], col_ptr_[k + 1] - col_ptr_[k]);
  }
  double column_norm_squared(std::size_t k) const { return column_norm_sq_[k]; }

 private:
  void build_transpose();

  std::size_t n_rays_ = 0;
  std::size_t n_pixels_ = 0;
  std::uint64_t digest_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> csc_rows_;
  std::vector<double> csc_values_;
  std::vector<double> column_norm_sq_;
};

/// Exact ray-pixel intersection lengths (Siddon-style parametric marching),
/// rays traced in parallel.
SparseOperator build_projector(const GridShape& shape, const ProjectionGeometry& geom);
inline SparseOperator build_projector(const ImageGrid& grid, const ProjectionGeometry& geom) {
  return build_projector(grid.shape(), geom);
}

/// y = A x, parallel over rays.
std::vector<double> apply(const SparseOperator& A, std::span<const double> x);
void apply_into(const SparseOperator& A, std::span<const double> x, std::span<double> out);

/// x = A^T r, parallel gather over pixels through the CSC copy.
std::vector<double> apply_adjoint(const SparseOperator& A, std::span<const double> r);
void apply_adjoint_into(const SparseOperator& A, std::span<const double> r, std::span<double> out);

/// Serial reference kernels kept for testing and benchmarking the parallel ones.
namespace reference {
SparseOperator build_projector(const GridShape& shape, const ProjectionGeometry& geom);
std::vector<double> apply(const SparseOperator& A, std::span<const double> x);
/// Scatter through the CSR rows; summation order differs from the gather kernel.
std::vector<double> apply_adjoint(const SparseOperator& A, std::span<const double> r);
}  // namespace reference

/// Measurement vector y = A x + e with e ~ N(0, sigma^2 I).
struct Sinogram {
  std::vector<double> values;
  double noise_sigma = 1.0;
  std::uint64_t geometry_digest = 0;
};

/// sigma = noise_fraction * max(A truth); noise drawn from Rng(seed).
Sinogram simulate_sinogram(const ImageGrid& truth, const SparseOperator& A, double noise_fraction,
                           std::uint64_t seed);

/// 0.5 * ||y - A x||^2 / sigma^2
double likelihood_neglog(const SparseOperator& A, const Sinogram& y, std::span<const double> x);
/// -A^T (y - A x) / sigma^2
std::vector<double> likelihood_grad(const SparseOperator& A, const Sinogram& y, std::span<const double> x);
/// Value and gradient from one residual evaluation; gradient overwritten.
double likelihood_value_and_gradient(const SparseOperator& A, const Sinogram& y, std::span<const double> x,
                                     std::span<double> grad);

}  // namespace baytomo
