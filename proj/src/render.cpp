#include "baytomo/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace baytomo {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty range");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image, double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<unsigned char> pixels(image.size());
  const auto values = image.values();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double t = std::isfinite(values[k]) ? (values[k] - lo) / span : 0.0;
    pixels[k] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
  }
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace baytomo
