#include "baytomo/dwt.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace baytomo {

std::size_t max_dwt_levels(std::size_t side) {
  if (side < 2 || !std::has_single_bit(side)) return 0;
  return static_cast<std::size_t>(std::countr_zero(side));
}

DwtOperator::DwtOperator(std::size_t side, std::size_t levels) : side_(side), levels_(levels) {
  const std::size_t max_levels = max_dwt_levels(side);
  if (max_levels == 0) throw std::invalid_argument("DWT side must be a power of two >= 2, got " + std::to_string(side));
  if (levels == 0 || levels > max_levels) {
    throw std::invalid_argument("DWT levels must be in [1, " + std::to_string(max_levels) + "]");
  }
  const std::size_t coarse_block = std::size_t{1} << levels;
  const std::size_t coarse_side = side / coarse_block;
  approx_count_ = coarse_side * coarse_side;
  per_column_ = 1 + 3 * levels;

  // block offsets, coarse to fine
  std::vector<std::size_t> level_offset(levels + 1, 0);
  std::size_t offset = approx_count_;
  for (std::size_t s = levels; s >= 1; --s) {
    level_offset[s] = offset;
    const std::size_t nb = side >> s;
    offset += 3 * nb * nb;
  }

  col_rows_.resize(size() * per_column_);
  col_values_.resize(size() * per_column_);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const std::size_t k = i * side + j;
      std::size_t e = k * per_column_;
      col_rows_[e] = static_cast<std::uint32_t>((i / coarse_block) * coarse_side + j / coarse_block);
      col_values_[e] = 1.0 / static_cast<double>(coarse_block);
      ++e;
      for (std::size_t s = levels; s >= 1; --s) {
        const std::size_t b = std::size_t{1} << s;
        const std::size_t nb = side >> s;
        const std::size_t pos = (i / b) * nb + j / b;
        const double mag = 1.0 / static_cast<double>(b);
        const double lr = (j % b) < b / 2 ? 1.0 : -1.0;
        const double tb = (i % b) < b / 2 ? 1.0 : -1.0;
        const double signs[3] = {lr, tb, lr * tb};
        for (std::size_t t = 0; t < 3; ++t) {
          col_rows_[e] = static_cast<std::uint32_t>(level_offset[s] + t * nb * nb + pos);
          col_values_[e] = signs[t] * mag;
          ++e;
        }
      }
    }
  }
}

std::vector<double> DwtOperator::analyze(std::span<const double> image) const {
  if (image.size() != size()) throw std::invalid_argument("DWT analyze: dimension mismatch");
  std::vector<double> w(size(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    const double xk = image[k];
    if (xk == 0.0) continue;
    const std::size_t base = k * per_column_;
    for (std::size_t e = 0; e < per_column_; ++e) w[col_rows_[base + e]] += col_values_[base + e] * xk;
  }
  return w;
}

std::vector<double> DwtOperator::synthesize(std::span<const double> coefficients) const {
  if (coefficients.size() != size()) throw std::invalid_argument("DWT synthesize: dimension mismatch");
  std::vector<double> x(size(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    const std::size_t base = k * per_column_;
    double sum = 0.0;
    for (std::size_t e = 0; e < per_column_; ++e) sum += col_values_[base + e] * coefficients[col_rows_[base + e]];
    x[k] = sum;
  }
  return x;
}

}  // namespace baytomo
