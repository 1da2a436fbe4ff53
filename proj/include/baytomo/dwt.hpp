#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace baytomo {

/// Orthonormal 2D Haar analysis matrix D for a 2^n x 2^n image, W = D x.
///
/// Coefficients are ordered approximation block first, then detail blocks
/// from the coarsest level to the finest; each level holds three sub-blocks
/// t = 1 (horizontal: left minus right half), t = 2 (vertical: top minus
/// bottom), t = 3 (diagonal). Inside a block, coefficients run row-major
/// over block position. Pixel k touches exactly 1 + 3*levels coefficients,
/// which is what makes single-pixel updates of the wavelet coefficients
/// cheap.
class DwtOperator {
 public:
  DwtOperator(std::size_t side, std::size_t levels);

  std::size_t side() const { return side_; }
  std::size_t levels() const { return levels_; }
  std::size_t size() const { return side_ * side_; }
  std::size_t approximation_count() const { return approx_count_; }

  std::vector<double> analyze(std::span<const double> image) const;
  std::vector<double> synthesize(std::span<const double> coefficients) const;

  std::span<const std::uint32_t> column_rows(std::size_t pixel) const {
    return std::span(col_rows_).subspan(pixel * per_column_, per_column_);
  }
  std::span<const double> column_values(std::size_t pixel) const {
    return std::span(col_values_).subspan(pixel * per_column_, per_column_);
  }
  std::size_t nonzeros_per_column() const { return per_column_; }

 private:
  std::size_t side_;
  std::size_t levels_;
  std::size_t approx_count_;
  std::size_t per_column_;
  // CSC with a fixed column length
  std::vector<std::uint32_t> col_rows_;
  std::vector<double> col_values_;
};

/// Largest usable level count for a side length, or 0 if it is not a power
/// of two.
std::size_t max_dwt_levels(std::size_t side);

}  // namespace baytomo
