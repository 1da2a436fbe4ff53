#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace baytomo {

struct PixelIndex {
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Shape of a square-pixel lattice centred on the origin. Row 0 is the top
/// edge (largest y), column 0 the left edge (smallest x).
struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pixel_size = 1.0;

  std::size_t size() const { return rows * cols; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }
  PixelIndex pixel(std::size_t k) const { return {k / cols, k % cols}; }
  bool on_boundary(std::size_t row, std::size_t col) const {
    return row == 0 || col == 0 || row + 1 == rows || col + 1 == cols;
  }
  double width() const { return static_cast<double>(cols) * pixel_size; }
  double height() const { return static_cast<double>(rows) * pixel_size; }

  void validate() const;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Attenuation field on a GridShape, row-major.
class ImageGrid {
 public:
  ImageGrid() = default;
  explicit ImageGrid(GridShape shape);
  ImageGrid(GridShape shape, std::vector<double> values);
  ImageGrid(std::size_t rows, std::size_t cols, double pixel_size)
      : ImageGrid(GridShape{rows, cols, pixel_size}) {}

  const GridShape& shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  double pixel_size() const { return shape_.pixel_size; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::vector<double>& storage() { return values_; }

  double operator()(std::size_t row, std::size_t col) const { return values_[shape_.index(row, col)]; }
  double& operator()(std::size_t row, std::size_t col) { return values_[shape_.index(row, col)]; }

 private:
  GridShape shape_;
  std::vector<double> values_;
};

}  // namespace baytomo
