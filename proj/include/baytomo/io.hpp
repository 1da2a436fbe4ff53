#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "baytomo/geometry.hpp"
#include "baytomo/grid.hpp"

namespace baytomo {

/// On-disk artifacts are a raw little-endian float64 payload `<stem>.raw`
/// plus a text header `<stem>.hdr` of `key value...` lines. The first header
/// line names the artifact kind and format version.
///
///   image:    n_rows, n_cols, pixel_size
///   sinogram: the image keys for the reconstruction grid, noise_sigma,
///             geometry_digest (16 hex digits), angles, offsets
///   volume:   the image keys plus n_slices and slice_spacing
///
/// Reals are written in shortest round-trip form, so headers reload exactly.
namespace fs = std::filesystem;

struct SinogramFile {
  Sinogram sinogram;
  GridShape shape;
  ProjectionGeometry geometry;
};

/// Ordered 2D slices sharing one shape.
struct VolumeStack {
  std::vector<ImageGrid> slices;
  double slice_spacing = 1.0;

  void validate() const;
};

void write_image(const fs::path& stem, const ImageGrid& image);
ImageGrid read_image(const fs::path& stem);

void write_sinogram(const fs::path& stem, const SinogramFile& file);
SinogramFile read_sinogram(const fs::path& stem);

void write_volume(const fs::path& stem, const VolumeStack& volume);
VolumeStack read_volume(const fs::path& stem);

/// Stacks two or more same-shape slices.
VolumeStack stack_slices(std::vector<ImageGrid> slices, double slice_spacing = 1.0);
std::vector<ImageGrid> unstack(const VolumeStack& volume);

/// Long-form CSV `row,col,value` with a header row.
void write_image_csv(const fs::path& path, const ImageGrid& image);
ImageGrid read_image_csv(const fs::path& path, double pixel_size = 1.0);

/// Accepts `name`, `name.hdr` or `name.raw` and returns `name`.
fs::path artifact_stem(const fs::path& path);

std::string format_real(double value);
std::string format_digest(std::uint64_t digest);

}  // namespace baytomo
