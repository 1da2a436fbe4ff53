#pragma once

#include <filesystem>
#include <span>

#include "baytomo/grid.hpp"

namespace baytomo {

/// q-th percentile (q in [0,100]) with linear interpolation between order
/// statistics.
double percentile(std::span<const double> values, double q);

/// 8-bit binary PGM. Values map linearly from [lo, hi] onto 0..255 with
/// clamping: gray = round(255 * (v - lo) / (hi - lo)).
void write_pgm(const std::filesystem::path& path, const ImageGrid& image, double lo, double hi);

}  // namespace baytomo
