#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "baytomo/grid.hpp"
#include "baytomo/io.hpp"

namespace baytomo {

enum class PhantomKind { log, drill_core };

std::string to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(const std::string& text);

struct AttenuationTable {
  double background = 0.0;
  double wood = 1.0;
  double rot = 0.6;
  double knot = 1.6;
  double metal = 4.0;
  double matrix = 1.0;
  double pore = 0.2;
  double cob = 1.5;
};

/// Closed interval of feature radii, in units of the half-width of the grid.
struct RadiusRange {
  double min = 0.0;
  double max = 0.0;
};

/// Positions and sizes are given in normalized coordinates: the grid spans
/// [-1, 1] in both directions whatever its pixel size.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::log;
  std::size_t side = 64;
  /// 0 selects 2 / side, i.e. a physical domain of [-1, 1]^2.
  double pixel_size = 0.0;
  std::uint64_t seed = 1;
  AttenuationTable values;

  // log
  double trunk_semi_x = 0.86;
  double trunk_semi_y = 0.78;
  std::size_t knots = 4;
  RadiusRange knot_radius{0.07, 0.12};
  bool rot = true;
  RadiusRange rot_radius{0.16, 0.22};
  bool metal = true;
  /// Half extents of the metal rectangle.
  double metal_half_x = 0.06;
  double metal_half_y = 0.09;
  /// Radial travel of each knot centre from the first to the last slice.
  double knot_sweep = 0.3;

  // drill core
  double core_radius = 0.88;
  std::size_t pores = 24;
  RadiusRange pore_radius{0.03, 0.07};
  std::size_t cobs = 10;
  RadiusRange cob_radius{0.05, 0.11};

  double resolved_pixel_size() const { return pixel_size > 0.0 ? pixel_size : 2.0 / static_cast<double>(side); }
  GridShape shape() const { return {side, side, resolved_pixel_size()}; }
  void validate() const;
};

enum class Material : std::uint8_t { background, wood, rot, knot, metal, matrix, pore, cob };

/// Axis-aligned rectangle in normalized coordinates.
struct Rect {
  double x0, x1, y0, y1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct Circle {
  double x, y, r;
};

/// Normalized centre coordinates of pixel (i, j); row 0 is the top.
double pixel_center_x(const GridShape& shape, std::size_t j);
double pixel_center_y(const GridShape& shape, std::size_t i);

/// Single log slice (slice 0 of 1).
ImageGrid make_log_phantom(const PhantomSpec& spec);
/// Slice `index` of an n-slice log volume; knots drift outward along their
/// branch direction, everything else is shared by all slices.
ImageGrid make_log_slice(const PhantomSpec& spec, std::size_t index, std::size_t n_slices);
VolumeStack make_log_volume(const PhantomSpec& spec, std::size_t n_slices, double slice_spacing = 1.0);
/// Per-pixel dominant material of the same slice; rot is labelled where
/// the blend weight exceeds one half.
std::vector<Material> log_phantom_labels(const PhantomSpec& spec, std::size_t index = 0, std::size_t n_slices = 1);
Rect log_metal_rect(const PhantomSpec& spec);

struct DrillCoreLayout {
  std::vector<Circle> pores;
  std::vector<Circle> cobs;
  /// One entry per feature type that fell short of the requested count.
  std::vector<std::string> warnings;
};

/// Non-overlapping features placed by rejection sampling with a shared
/// budget of 10^4 attempts.
DrillCoreLayout drillcore_layout(const PhantomSpec& spec);
/// Shortfall warnings are printed to stderr.
ImageGrid make_drillcore_phantom(const PhantomSpec& spec);

/// Dispatches on spec.kind.
ImageGrid make_phantom(const PhantomSpec& spec);

}  // namespace baytomo
