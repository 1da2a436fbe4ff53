#include "baytomo/grid.hpp"

#include <stdexcept>
#include <string>

namespace baytomo {

void GridShape::validate() const {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid must have at least one row and column");
  if (!(pixel_size > 0.0)) throw std::invalid_argument("pixel_size must be positive");
}

ImageGrid::ImageGrid(GridShape shape) : shape_(shape), values_(shape.size(), 0.0) {
  shape_.validate();
}

ImageGrid::ImageGrid(GridShape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  shape_.validate();
  if (values_.size() != shape_.size()) {
    throw std::invalid_argument("image has " + std::to_string(values_.size()) + " values, shape needs " +
                                std::to_string(shape_.size()));
  }
}

}  // namespace baytomo
