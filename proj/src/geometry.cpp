#include "baytomo/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "baytomo/parallel.hpp"
#include "baytomo/rng.hpp"

namespace baytomo {

void ProjectionGeometry::validate() const {
  if (angles.empty()) throw std::invalid_argument("projection geometry has no angles");
  if (offsets.empty()) throw std::invalid_argument("projection geometry has no detector offsets");
  for (std::size_t a = 1; a < angles.size(); ++a) {
    if (!(angles[a] > angles[a - 1])) throw std::invalid_argument("angles must be strictly increasing");
  }
  for (std::size_t d = 1; d < offsets.size(); ++d) {
    if (!(offsets[d] > offsets[d - 1])) throw std::invalid_argument("offsets must be strictly increasing");
  }
  for (double a : angles) {
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite angle");
  }
}

ProjectionGeometry make_parallel_geometry(const GridShape& shape, std::size_t n_angles, std::size_t detector_count) {
  shape.validate();
  if (n_angles == 0) throw std::invalid_argument("need at least one projection angle");
  if (detector_count == 0) detector_count = shape.cols;

  ProjectionGeometry geom;
  geom.angles.resize(n_angles);
  for (std::size_t a = 0; a < n_angles; ++a) {
    geom.angles[a] = std::numbers::pi * static_cast<double>(a) / static_cast<double>(n_angles);
  }
  const double radius = 0.5 * std::hypot(shape.width(), shape.height());
  const double bin = 2.0 * radius / static_cast<double>(detector_count);
  geom.offsets.resize(detector_count);
  for (std::size_t d = 0; d < detector_count; ++d) {
    // mirror the lower half so the layout is exactly symmetric about 0
    const std::size_t mirror = detector_count - 1 - d;
    if (mirror < d) {
      geom.offsets[d] = -geom.offsets[mirror];
    } else {
      geom.offsets[d] = -radius + (static_cast<double>(d) + 0.5) * bin;
    }
  }
  if (detector_count % 2 == 1) geom.offsets[detector_count / 2] = 0.0;
  return geom;
}

std::uint64_t geometry_digest(const GridShape& shape, const ProjectionGeometry& geom) {
  // FNV-1a over little-endian words
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (word >> (8 * byte)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  };
  mix(shape.rows);
  mix(shape.cols);
  mix(std::bit_cast<std::uint64_t>(shape.pixel_size));
  mix(geom.angles.size());
  for (double a : geom.angles) mix(std::bit_cast<std::uint64_t>(a));
  mix(geom.offsets.size());
  for (double s : geom.offsets) mix(std::bit_cast<std::uint64_t>(s));
  return hash;
}

namespace {

struct Line {
  double px, py;  // point on the line closest to the origin
  double dx, dy;  // unit direction
};

Line make_line(double angle, double offset) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {offset * c, offset * s, -s, c};
}

// Parameter interval of the line inside the closed box; empty if lo >= hi.
std::pair<double, double> clip_to_box(const Line& line, const GridShape& shape) {
  const double half_w = 0.5 * shape.width();
  const double half_h = 0.5 * shape.height();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto slab = [&](double p, double d, double min, double max) {
    if (d != 0.0) {
      const double t1 = (min - p) / d;
      const double t2 = (max - p) / d;
      lo = std::max(lo, std::min(t1, t2));
      hi = std::min(hi, std::max(t1, t2));
    } else if (p < min || p > max) {
      lo = 1.0;
      hi = 0.0;
    }
  };
  slab(line.px, line.dx, -half_w, half_w);
  slab(line.py, line.dy, -half_h, half_h);
  return {lo, hi};
}

}  // namespace

double clipped_chord_length(const GridShape& shape, double angle, double offset) {
  const auto [lo, hi] = clip_to_box(make_line(angle, offset), shape);
  return hi > lo ? hi - lo : 0.0;
}

std::vector<RowEntry> trace_ray(const GridShape& shape, double angle, double offset) {
  const Line line = make_line(angle, offset);
  const auto [lo, hi] = clip_to_box(line, shape);
  std::vector<RowEntry> row;
  if (!(hi > lo)) return row;

  const double h = shape.pixel_size;
  const double x_min = -0.5 * shape.width();
  const double y_max = 0.5 * shape.height();

  // parametric positions of every grid-line crossing strictly inside (lo, hi)
  std::vector<double> ts;
  ts.reserve(shape.rows + shape.cols + 4);
  ts.push_back(lo);
  if (line.dx != 0.0) {
    for (std::size_t j = 0; j <= shape.cols; ++j) {
      const double t = (x_min + static_cast<double>(j) * h - line.px) / line.dx;
      if (t > lo && t < hi) ts.push_back(t);
    }
  }
  if (line.dy != 0.0) {
    for (std::size_t i = 0; i <= shape.rows; ++i) {
      const double t = (y_max - static_cast<double>(i) * h - line.py) / line.dy;
      if (t > lo && t < hi) ts.push_back(t);
    }
  }
  ts.push_back(hi);
  std::sort(ts.begin() + 1, ts.end() - 1);

  const auto max_col = static_cast<double>(shape.cols - 1);
  const auto max_row = static_cast<double>(shape.rows - 1);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double length = ts[k + 1] - ts[k];
    if (!(length > 0.0)) continue;
    const double tm = 0.5 * (ts[k] + ts[k + 1]);
    const double xm = line.px + tm * line.dx;
    const double ym = line.py + tm * line.dy;
    const double col = std::clamp(std::floor((xm - x_min) / h), 0.0, max_col);
    const double rw = std::clamp(std::floor((y_max - ym) / h), 0.0, max_row);
    const auto pixel = shape.index(static_cast<std::size_t>(rw), static_cast<std::size_t>(col));
    row.push_back({static_cast<std::uint32_t>(pixel), length});
  }

  std::sort(row.begin(), row.end(), [](const RowEntry& a, const RowEntry& b) { return a.col < b.col; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (out > 0 && row[out - 1].col == row[k].col) {
      row[out - 1].value += row[k].value;
    } else {
      row[out++] = row[k];
    }
  }
  row.resize(out);
  return row;
}

SparseOperator::SparseOperator(std::size_t n_rays, std::size_t n_pixels, std::vector<std::size_t> row_ptr,
                               std::vector<std::uint32_t> col_idx, std::vector<double> values, std::uint64_t digest)
    : n_rays_(n_rays),
      n_pixels_(n_pixels),
      digest_(digest),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_rays_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
      col_idx_.size() != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < n_rays_; ++r) {
    if (row_ptr_[r + 1] < row_ptr_[r]) throw std::invalid_argument("row pointers must be non-decreasing");
    for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
      if (col_idx_[e] >= n_pixels_) throw std::invalid_argument("column index out of range");
      if (e > row_ptr_[r] && col_idx_[e] <= col_idx_[e - 1]) {
        throw std::invalid_argument("column indices must be strictly increasing within a row");
      }
      if (!(values_[e] > 0.0)) throw std::invalid_argument("stored values must be positive");
    }
  }
  build_transpose();
}

void SparseOperator::build_transpose() {
  col_ptr_.assign(n_pixels_ + 1, 0);
  for (auto c : col_idx_) ++col_ptr_[c + 1];
  for (std::size_t k = 0; k < n_pixels_; ++k) col_ptr_[k + 1] += col_ptr_[k];
  csc_rows_.resize(values_.size());
  csc_values_.resize(values_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t r = 0; r < n_rays_; ++r) {
    for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
      const std::size_t slot = fill[col_idx_[e]]++;
      csc_rows_[slot] = static_cast<std::uint32_t>(r);
      csc_values_[slot] = values_[e];
    }
  }
  column_norm_sq_.assign(n_pixels_, 0.0);
  for (std::size_t k = 0; k < n_pixels_; ++k) {
    double sum = 0.0;
    for (std::size_t e = col_ptr_[k]; e < col_ptr_[k + 1]; ++e) sum += csc_values_[e] * csc_values_[e];
    column_norm_sq_[k] = sum;
  }
}

namespace {

SparseOperator assemble(const GridShape& shape, const ProjectionGeometry& geom,
                        const std::vector<std::vector<RowEntry>>& rows) {
  std::vector<std::size_t> row_ptr(rows.size() + 1, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) row_ptr[r + 1] = row_ptr[r] + rows[r].size();
  std::vector<std::uint32_t> cols(row_ptr.back());
  std::vector<double> vals(row_ptr.back());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t e = row_ptr[r];
    for (const auto& entry : rows[r]) {
      cols[e] = entry.col;
      vals[e] = entry.value;
      ++e;
    }
  }
  return SparseOperator(geom.ray_count(), shape.size(), std::move(row_ptr), std::move(cols), std::move(vals),
                        geometry_digest(shape, geom));
}

void check_inputs(const GridShape& shape, const ProjectionGeometry& geom) {
  shape.validate();
  geom.validate();
  if (shape.size() > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("grid too large");
}

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                                std::to_string(got));
  }
}

}  // namespace

SparseOperator build_projector(const GridShape& shape, const ProjectionGeometry& geom) {
  check_inputs(shape, geom);
  const auto n_rays = static_cast<std::int64_t>(geom.ray_count());
  std::vector<std::vector<RowEntry>> rows(geom.ray_count());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t r = 0; r < n_rays; ++r) {
    const auto a = static_cast<std::size_t>(r) / geom.detector_count();
    const auto d = static_cast<std::size_t>(r) % geom.detector_count();
    rows[r] = trace_ray(shape, geom.angles[a], geom.offsets[d]);
  }
  return assemble(shape, geom, rows);
}

void apply_into(const SparseOperator& A, std::span<const double> x, std::span<double> out) {
  check_length(x.size(), A.pixels(), "apply");
  check_length(out.size(), A.rays(), "apply output");
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  const auto n = static_cast<std::int64_t>(A.rays());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (std::size_t e = rp[r]; e < rp[r + 1]; ++e) sum += v[e] * x[ci[e]];
    out[r] = sum;
  }
}

std::vector<double> apply(const SparseOperator& A, std::span<const double> x) {
  std::vector<double> out(A.rays());
  apply_into(A, x, out);
  return out;
}

void apply_adjoint_into(const SparseOperator& A, std::span<const double> r, std::span<double> out) {
  check_length(r.size(), A.rays(), "apply_adjoint");
  check_length(out.size(), A.pixels(), "apply_adjoint output");
  const auto n = static_cast<std::int64_t>(A.pixels());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto rows = A.column_rows(k);
    const auto vals = A.column_values(k);
    double sum = 0.0;
    for (std::size_t e = 0; e < rows.size(); ++e) sum += vals[e] * r[rows[e]];
    out[k] = sum;
  }
}

std::vector<double> apply_adjoint(const SparseOperator& A, std::span<const double> r) {
  std::vector<double> out(A.pixels());
  apply_adjoint_into(A, r, out);
  return out;
}

namespace reference {

SparseOperator build_projector(const GridShape& shape, const ProjectionGeometry& geom) {
  check_inputs(shape, geom);
  std::vector<std::vector<RowEntry>> rows;
  rows.reserve(geom.ray_count());
  for (double angle : geom.angles) {
    for (double offset : geom.offsets) rows.push_back(trace_ray(shape, angle, offset));
  }
  return assemble(shape, geom, rows);
}

}  // namespace reference

Sinogram simulate_sinogram(const ImageGrid& truth, const SparseOperator& A, double noise_fraction,
                           std::uint64_t seed) {
  if (!(noise_fraction > 0.0)) throw std::invalid_argument("noise_fraction must be positive");
  check_length(truth.size(), A.pixels(), "simulate_sinogram");
  Sinogram sino;
  sino.values = apply(A, truth.values());
  const double peak = *std::max_element(sino.values.begin(), sino.values.end());
  if (!(peak > 0.0)) throw std::invalid_argument("projections of the truth are identically zero");
  sino.noise_sigma = noise_fraction * peak;
  sino.geometry_digest = A.digest();
  Rng rng(seed);
  for (double& y : sino.values) y += sino.noise_sigma * rng.normal();
  return sino;
}

double likelihood_value_and_gradient(const SparseOperator& A, const Sinogram& y, std::span<const double> x,
                                     std::span<double> grad) {
  check_length(y.values.size(), A.rays(), "sinogram");
  const double inv_var = 1.0 / (y.noise_sigma * y.noise_sigma);
  if (worker_threads() == 1) {
    // One sweep over the rows: residual, then scatter into the gradient. Each
    // pixel receives its terms in ascending row order, exactly as the CSC sum
    // would add them, so the result matches the two-pass path bit for bit.
    check_length(x.size(), A.pixels(), "apply");
    check_length(grad.size(), A.pixels(), "apply_adjoint output");
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto v = A.values();
    std::fill(grad.begin(), grad.end(), 0.0);
    double sum = 0.0;
    for (std::size_t r = 0; r < A.rays(); ++r) {
      double ax = 0.0;
      for (std::size_t e = rp[r]; e < rp[r + 1]; ++e) ax += v[e] * x[ci[e]];
      const double res = y.values[r] - ax;
      sum += res * res;
      for (std::size_t e = rp[r]; e < rp[r + 1]; ++e) grad[ci[e]] += v[e] * res;
    }
    for (double& g : grad) g *= -inv_var;
    return 0.5 * sum * inv_var;
  }
  std::vector<double> residual = apply(A, x);
  double sum = 0.0;
  for (std::size_t r = 0; r < residual.size(); ++r) {
    residual[r] = y.values[r] - residual[r];
    sum += residual[r] * residual[r];
  }
  apply_adjoint_into(A, residual, grad);
  for (double& g : grad) g *= -inv_var;
  return 0.5 * sum * inv_var;
}

double likelihood_neglog(const SparseOperator& A, const Sinogram& y, std::span<const double> x) {
  check_length(y.values.size(), A.rays(), "sinogram");
  const std::vector<double> ax = apply(A, x);
  double sum = 0.0;
  for (std::size_t r = 0; r < ax.size(); ++r) {
    const double res = y.values[r] - ax[r];
    sum += res * res;
  }
  return 0.5 * sum / (y.noise_sigma * y.noise_sigma);
}

std::vector<double> likelihood_grad(const SparseOperator& A, const Sinogram& y, std::span<const double> x) {
  std::vector<double> grad(A.pixels());
  likelihood_value_and_gradient(A, y, x, grad);
  return grad;
}

}  // namespace baytomo
