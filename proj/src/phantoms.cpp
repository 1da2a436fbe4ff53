#include "baytomo/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <set>
#include <stdexcept>

#include "baytomo/rng.hpp"

namespace baytomo {

std::string to_string(PhantomKind kind) { return kind == PhantomKind::log ? "log" : "drill_core"; }

PhantomKind parse_phantom_kind(const std::string& text) {
  if (text == "log") return PhantomKind::log;
  if (text == "drill_core") return PhantomKind::drill_core;
  throw std::invalid_argument("unknown phantom kind '" + text + "' (expected log or drill_core)");
}

namespace {

void check_range(const RadiusRange& r, const char* what) {
  if (!(r.min > 0.0) || !(r.max >= r.min) || r.max >= 1.0) {
    throw std::invalid_argument(std::string(what) + " radius range must satisfy 0 < min <= max < 1");
  }
}

void check_distinct(std::initializer_list<double> values, const char* what) {
  std::set<double> seen;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " values must be finite and >= 0");
    if (!seen.insert(v).second) throw std::invalid_argument(std::string(what) + " values must be distinct per material");
  }
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t;
  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = dx * cos_t + dy * sin_t;
    const double v = -dx * sin_t + dy * cos_t;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

struct LogLayout {
  std::vector<Ellipse> knots;
  double rot_x, rot_y;
  Rect metal;
};

bool in_trunk(const PhantomSpec& s, double x, double y) {
  return (x * x) / (s.trunk_semi_x * s.trunk_semi_x) + (y * y) / (s.trunk_semi_y * s.trunk_semi_y) <= 1.0;
}

// Every random draw is made whatever the feature flags, so switching one
// feature off leaves the others where they were.
LogLayout log_layout(const PhantomSpec& s, std::size_t index, std::size_t n_slices) {
  Rng rng(s.seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double t = n_slices > 1 ? static_cast<double>(index) / static_cast<double>(n_slices - 1) : 0.5;
  LogLayout out{};
  for (std::size_t k = 0; k < s.knots; ++k) {
    const double phi = two_pi * rng.uniform();
    const double rho = 0.25 + 0.35 * rng.uniform();
    const double a = s.knot_radius.min + (s.knot_radius.max - s.knot_radius.min) * rng.uniform();
    const double rho_t = std::clamp(rho + s.knot_sweep * (t - 0.5), 0.0, 1.0);
    const double c = std::cos(phi), sn = std::sin(phi);
    out.knots.push_back({rho_t * s.trunk_semi_x * c, rho_t * s.trunk_semi_y * sn, a, 0.6 * a, c, sn});
  }
  const double psi = two_pi * rng.uniform();
  const double rho_rot = 0.3 + 0.25 * rng.uniform();
  out.rot_x = rho_rot * s.trunk_semi_x * std::cos(psi);
  out.rot_y = rho_rot * s.trunk_semi_y * std::sin(psi);

  const double chi = two_pi * rng.uniform();
  double rho_m = 0.2 + 0.3 * rng.uniform();
  for (;;) {
    const double mx = rho_m * s.trunk_semi_x * std::cos(chi), my = rho_m * s.trunk_semi_y * std::sin(chi);
    out.metal = {mx - s.metal_half_x, mx + s.metal_half_x, my - s.metal_half_y, my + s.metal_half_y};
    const bool fits = in_trunk(s, out.metal.x0, out.metal.y0) && in_trunk(s, out.metal.x0, out.metal.y1) &&
                      in_trunk(s, out.metal.x1, out.metal.y0) && in_trunk(s, out.metal.x1, out.metal.y1);
    if (fits || rho_m <= 0.0) break;
    rho_m = std::max(0.0, rho_m - 0.05);
  }
  return out;
}

double rot_weight(const PhantomSpec& s, const LogLayout& L, double x, double y) {
  const double d = std::hypot(x - L.rot_x, y - L.rot_y);
  const double width = s.rot_radius.max - s.rot_radius.min;
  if (width <= 0.0) return d <= s.rot_radius.max ? 1.0 : 0.0;
  return smoothstep((s.rot_radius.max - d) / width);
}

template <typename F>
void for_each_pixel(const PhantomSpec& spec, F&& f) {
  const GridShape shape = spec.shape();
  for (std::size_t i = 0; i < shape.rows; ++i) {
    const double y = pixel_center_y(shape, i);
    for (std::size_t j = 0; j < shape.cols; ++j) f(i, j, pixel_center_x(shape, j), y);
  }
}

}  // namespace

void PhantomSpec::validate() const {
  if (side < 2) throw std::invalid_argument("phantom side must be at least 2");
  if (pixel_size < 0.0 || !std::isfinite(pixel_size)) throw std::invalid_argument("phantom pixel_size must be >= 0");
  if (kind == PhantomKind::log) {
    check_distinct({values.background, values.wood, values.rot, values.knot, values.metal}, "log attenuation");
    if (!(trunk_semi_x > 0.0 && trunk_semi_x <= 1.0 && trunk_semi_y > 0.0 && trunk_semi_y <= 1.0)) {
      throw std::invalid_argument("trunk semi-axes must lie in (0, 1]");
    }
    check_range(knot_radius, "knot");
    check_range(rot_radius, "rot");
    if (!(metal_half_x > 0.0 && metal_half_y > 0.0 && metal_half_x < trunk_semi_x && metal_half_y < trunk_semi_y)) {
      throw std::invalid_argument("metal half extents must be positive and smaller than the trunk");
    }
    if (!(knot_sweep >= 0.0) || !std::isfinite(knot_sweep)) throw std::invalid_argument("knot_sweep must be >= 0");
  } else {
    check_distinct({values.background, values.matrix, values.pore, values.cob}, "drill core attenuation");
    if (!(core_radius > 0.0 && core_radius <= 1.0)) throw std::invalid_argument("core radius must lie in (0, 1]");
    check_range(pore_radius, "pore");
    check_range(cob_radius, "cob");
    if (pore_radius.max >= core_radius || cob_radius.max >= core_radius) {
      throw std::invalid_argument("feature radii must be smaller than the core");
    }
  }
}

double pixel_center_x(const GridShape& shape, std::size_t j) {
  return (static_cast<double>(j) + 0.5) * 2.0 / static_cast<double>(shape.cols) - 1.0;
}

double pixel_center_y(const GridShape& shape, std::size_t i) {
  return 1.0 - (static_cast<double>(i) + 0.5) * 2.0 / static_cast<double>(shape.rows);
}

ImageGrid make_log_slice(const PhantomSpec& spec, std::size_t index, std::size_t n_slices) {
  if (spec.kind != PhantomKind::log) throw std::invalid_argument("make_log_phantom needs a log spec");
  spec.validate();
  if (n_slices == 0 || index >= n_slices) throw std::invalid_argument("slice index out of range");
  const LogLayout L = log_layout(spec, index, n_slices);
  const auto& v = spec.values;
  ImageGrid image(spec.shape());
  for_each_pixel(spec, [&](std::size_t i, std::size_t j, double x, double y) {
    double value = v.background;
    if (in_trunk(spec, x, y)) {
      value = v.wood;
      if (spec.rot) value += (v.rot - v.wood) * rot_weight(spec, L, x, y);
      for (const auto& e : L.knots) {
        if (e.contains(x, y)) value = v.knot;
      }
      if (spec.metal && L.metal.contains(x, y)) value = v.metal;
    }
    image(i, j) = value;
  });
  return image;
}

ImageGrid make_log_phantom(const PhantomSpec& spec) { return make_log_slice(spec, 0, 1); }

VolumeStack make_log_volume(const PhantomSpec& spec, std::size_t n_slices, double slice_spacing) {
  if (n_slices < 2) throw std::invalid_argument("a volume needs at least two slices");
  spec.validate();
  std::vector<ImageGrid> slices(n_slices, ImageGrid(spec.shape()));
  const auto n = static_cast<std::int64_t>(n_slices);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) slices[s] = make_log_slice(spec, static_cast<std::size_t>(s), n_slices);
  return stack_slices(std::move(slices), slice_spacing);
}

std::vector<Material> log_phantom_labels(const PhantomSpec& spec, std::size_t index, std::size_t n_slices) {
  if (spec.kind != PhantomKind::log) throw std::invalid_argument("log_phantom_labels needs a log spec");
  spec.validate();
  const LogLayout L = log_layout(spec, index, n_slices);
  std::vector<Material> labels(spec.side * spec.side, Material::background);
  const GridShape shape = spec.shape();
  for_each_pixel(spec, [&](std::size_t i, std::size_t j, double x, double y) {
    Material m = Material::background;
    if (in_trunk(spec, x, y)) {
      m = Material::wood;
      if (spec.rot && rot_weight(spec, L, x, y) > 0.5) m = Material::rot;
      for (const auto& e : L.knots) {
        if (e.contains(x, y)) m = Material::knot;
      }
      if (spec.metal && L.metal.contains(x, y)) m = Material::metal;
    }
    labels[shape.index(i, j)] = m;
  });
  return labels;
}

Rect log_metal_rect(const PhantomSpec& spec) { return log_layout(spec, 0, 1).metal; }

DrillCoreLayout drillcore_layout(const PhantomSpec& spec) {
  if (spec.kind != PhantomKind::drill_core) throw std::invalid_argument("drill core layout needs a drill_core spec");
  spec.validate();
  constexpr std::size_t budget = 10000;
  const double gap = 2.0 / static_cast<double>(spec.side);
  Rng rng(spec.seed);
  DrillCoreLayout out;
  std::size_t attempts = 0;

  auto place = [&](std::size_t wanted, const RadiusRange& range, std::vector<Circle>& dest, const char* what) {
    while (dest.size() < wanted && attempts < budget) {
      ++attempts;
      const double r = range.min + (range.max - range.min) * rng.uniform();
      const double reach = spec.core_radius - r;
      const double rho = reach * std::sqrt(rng.uniform());
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const Circle c{rho * std::cos(phi), rho * std::sin(phi), r};
      bool clear = true;
      for (const auto* list : {&out.pores, &out.cobs}) {
        for (const auto& o : *list) {
          if (std::hypot(c.x - o.x, c.y - o.y) < c.r + o.r + gap) {
            clear = false;
            break;
          }
        }
        if (!clear) break;
      }
      if (clear) dest.push_back(c);
    }
    if (dest.size() < wanted) {
      out.warnings.push_back("drill core: placed " + std::to_string(dest.size()) + " of " + std::to_string(wanted) +
                             " " + what + " within " + std::to_string(budget) + " attempts");
    }
  };
  place(spec.pores, spec.pore_radius, out.pores, "pores");
  place(spec.cobs, spec.cob_radius, out.cobs, "cobs");
  return out;
}

ImageGrid make_drillcore_phantom(const PhantomSpec& spec) {
  const DrillCoreLayout L = drillcore_layout(spec);
  for (const auto& w : L.warnings) std::cerr << "warning: " << w << '\n';
  const auto& v = spec.values;
  ImageGrid image(spec.shape());
  for_each_pixel(spec, [&](std::size_t i, std::size_t j, double x, double y) {
    double value = v.background;
    if (std::hypot(x, y) <= spec.core_radius) {
      value = v.matrix;
      for (const auto& c : L.pores) {
        if (std::hypot(x - c.x, y - c.y) <= c.r) value = v.pore;
      }
      for (const auto& c : L.cobs) {
        if (std::hypot(x - c.x, y - c.y) <= c.r) value = v.cob;
      }
    }
    image(i, j) = value;
  });
  return image;
}

ImageGrid make_phantom(const PhantomSpec& spec) {
  return spec.kind == PhantomKind::log ? make_log_phantom(spec) : make_drillcore_phantom(spec);
}

}  // namespace baytomo
