#include "baytomo/io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace baytomo {

namespace {

constexpr const char* kImageMagic = "baytomo-image";
constexpr const char* kSinogramMagic = "baytomo-sinogram";
constexpr const char* kVolumeMagic = "baytomo-volume";
constexpr int kFormatVersion = 1;

using Header = std::map<std::string, std::vector<std::string>>;

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

void write_raw(const fs::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto bits = std::bit_cast<std::uint64_t>(values[k]);
    for (int b = 0; b < 8; ++b) bytes[8 * k + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<double> read_raw(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes(count * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(count) + " float64 values");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing bytes");
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[8 * k + b]) << (8 * b);
    values[k] = std::bit_cast<double>(bits);
  }
  return values;
}

Header read_header(const fs::path& path, const char* magic) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream first(line);
  std::string got_magic;
  int version = 0;
  first >> got_magic >> version;
  if (got_magic != magic) throw std::runtime_error(path.string() + ": not a " + magic + " header");
  if (version != kFormatVersion) throw std::runtime_error(path.string() + ": unsupported format version");
  Header header;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    header[key] = std::move(tokens);
  }
  return header;
}

const std::vector<std::string>& field(const Header& h, const std::string& key, const fs::path& path) {
  auto it = h.find(key);
  if (it == h.end() || it->second.empty()) throw std::runtime_error(path.string() + ": missing header key " + key);
  return it->second;
}

double parse_real(const std::string& s, const fs::path& path) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error(path.string() + ": bad number " + s);
  return v;
}

std::size_t parse_count(const std::string& s, const fs::path& path) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error(path.string() + ": bad count " + s);
  return v;
}

std::vector<double> parse_reals(const std::vector<std::string>& tokens, const fs::path& path) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(parse_real(t, path));
  return out;
}

GridShape read_shape(const Header& h, const fs::path& path) {
  GridShape shape{parse_count(field(h, "n_rows", path)[0], path), parse_count(field(h, "n_cols", path)[0], path),
                  parse_real(field(h, "pixel_size", path)[0], path)};
  shape.validate();
  return shape;
}

void write_shape(std::ostream& out, const GridShape& shape) {
  out << "n_rows " << shape.rows << '\n'
      << "n_cols " << shape.cols << '\n'
      << "pixel_size " << format_real(shape.pixel_size) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string format_real(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_digest(std::uint64_t digest) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(digest));
  return buf.data();
}

fs::path artifact_stem(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".hdr" || ext == ".raw") {
    fs::path stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

void write_image(const fs::path& stem, const ImageGrid& image) {
  std::ostringstream hdr;
  hdr << kImageMagic << ' ' << kFormatVersion << '\n';
  write_shape(hdr, image.shape());
  write_text(with_ext(stem, ".hdr"), hdr.str());
  write_raw(with_ext(stem, ".raw"), image.values());
}

ImageGrid read_image(const fs::path& path) {
  const auto stem = artifact_stem(path);
  const auto hdr_path = with_ext(stem, ".hdr");
  const Header h = read_header(hdr_path, kImageMagic);
  const GridShape shape = read_shape(h, hdr_path);
  return ImageGrid(shape, read_raw(with_ext(stem, ".raw"), shape.size()));
}

void write_sinogram(const fs::path& stem, const SinogramFile& file) {
  const auto& sino = file.sinogram;
  if (sino.values.size() != file.geometry.ray_count()) {
    throw std::invalid_argument("sinogram length does not match its geometry");
  }
  std::ostringstream hdr;
  hdr << kSinogramMagic << ' ' << kFormatVersion << '\n';
  write_shape(hdr, file.shape);
  hdr << "n_angles " << file.geometry.angle_count() << '\n'
      << "detector_count " << file.geometry.detector_count() << '\n'
      << "noise_sigma " << format_real(sino.noise_sigma) << '\n'
      << "geometry_digest " << format_digest(sino.geometry_digest) << '\n'
      << "angles";
  for (double a : file.geometry.angles) hdr << ' ' << format_real(a);
  hdr << "\noffsets";
  for (double s : file.geometry.offsets) hdr << ' ' << format_real(s);
  hdr << '\n';
  write_text(with_ext(stem, ".hdr"), hdr.str());
  write_raw(with_ext(stem, ".raw"), sino.values);
}

SinogramFile read_sinogram(const fs::path& path) {
  const auto stem = artifact_stem(path);
  const auto hdr_path = with_ext(stem, ".hdr");
  const Header h = read_header(hdr_path, kSinogramMagic);
  SinogramFile file;
  file.shape = read_shape(h, hdr_path);
  file.geometry.angles = parse_reals(field(h, "angles", hdr_path), hdr_path);
  file.geometry.offsets = parse_reals(field(h, "offsets", hdr_path), hdr_path);
  file.geometry.validate();
  if (parse_count(field(h, "n_angles", hdr_path)[0], hdr_path) != file.geometry.angle_count() ||
      parse_count(field(h, "detector_count", hdr_path)[0], hdr_path) != file.geometry.detector_count()) {
    throw std::runtime_error(hdr_path.string() + ": angle/offset lists disagree with declared counts");
  }
  file.sinogram.noise_sigma = parse_real(field(h, "noise_sigma", hdr_path)[0], hdr_path);
  if (!(file.sinogram.noise_sigma > 0.0)) throw std::runtime_error(hdr_path.string() + ": noise_sigma must be > 0");
  const auto& digest = field(h, "geometry_digest", hdr_path)[0];
  file.sinogram.geometry_digest = std::stoull(digest, nullptr, 16);
  if (file.sinogram.geometry_digest != geometry_digest(file.shape, file.geometry)) {
    throw std::runtime_error(hdr_path.string() + ": geometry digest does not match the stored geometry");
  }
  file.sinogram.values = read_raw(with_ext(stem, ".raw"), file.geometry.ray_count());
  return file;
}

void VolumeStack::validate() const {
  if (slices.empty()) throw std::invalid_argument("volume has no slices");
  for (const auto& s : slices) {
    if (!(s.shape() == slices.front().shape())) throw std::invalid_argument("volume slices differ in shape");
  }
  if (!(slice_spacing > 0.0)) throw std::invalid_argument("slice_spacing must be positive");
}

VolumeStack stack_slices(std::vector<ImageGrid> slices, double slice_spacing) {
  if (slices.size() < 2) throw std::invalid_argument("stacking needs at least two slices");
  VolumeStack volume{std::move(slices), slice_spacing};
  volume.validate();
  return volume;
}

std::vector<ImageGrid> unstack(const VolumeStack& volume) { return volume.slices; }

void write_volume(const fs::path& stem, const VolumeStack& volume) {
  volume.validate();
  std::ostringstream hdr;
  hdr << kVolumeMagic << ' ' << kFormatVersion << '\n';
  hdr << "n_slices " << volume.slices.size() << '\n';
  write_shape(hdr, volume.slices.front().shape());
  hdr << "slice_spacing " << format_real(volume.slice_spacing) << '\n';
  write_text(with_ext(stem, ".hdr"), hdr.str());
  std::vector<double> all;
  all.reserve(volume.slices.size() * volume.slices.front().size());
  for (const auto& s : volume.slices) all.insert(all.end(), s.values().begin(), s.values().end());
  write_raw(with_ext(stem, ".raw"), all);
}

VolumeStack read_volume(const fs::path& path) {
  const auto stem = artifact_stem(path);
  const auto hdr_path = with_ext(stem, ".hdr");
  const Header h = read_header(hdr_path, kVolumeMagic);
  const std::size_t n = parse_count(field(h, "n_slices", hdr_path)[0], hdr_path);
  const GridShape shape = read_shape(h, hdr_path);
  VolumeStack volume;
  volume.slice_spacing = parse_real(field(h, "slice_spacing", hdr_path)[0], hdr_path);
  const auto all = read_raw(with_ext(stem, ".raw"), n * shape.size());
  for (std::size_t s = 0; s < n; ++s) {
    const auto first = all.begin() + static_cast<std::ptrdiff_t>(s * shape.size());
    volume.slices.emplace_back(shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(shape.size())));
  }
  volume.validate();
  return volume;
}

void write_image_csv(const fs::path& path, const ImageGrid& image) {
  std::ostringstream out;
  out << "row,col,value\n";
  for (std::size_t i = 0; i < image.rows(); ++i) {
    for (std::size_t j = 0; j < image.cols(); ++j) out << i << ',' << j << ',' << format_real(image(i, j)) << '\n';
  }
  write_text(path, out.str());
}

ImageGrid read_image_csv(const fs::path& path, double pixel_size) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "row,col,value") throw std::runtime_error(path.string() + ": expected header row,col,value");
  struct Cell {
    std::size_t row, col;
    double value;
  };
  std::vector<Cell> cells;
  std::size_t rows = 0, cols = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected three fields");
    }
    Cell cell{parse_count(a, path), parse_count(b, path), parse_real(c, path)};
    rows = std::max(rows, cell.row + 1);
    cols = std::max(cols, cell.col + 1);
    cells.push_back(cell);
  }
  if (cells.size() != rows * cols) throw std::runtime_error(path.string() + ": CSV does not cover a full grid");
  ImageGrid image(rows, cols, pixel_size);
  std::vector<bool> seen(rows * cols, false);
  for (const auto& cell : cells) {
    const auto k = image.shape().index(cell.row, cell.col);
    if (seen[k]) throw std::runtime_error(path.string() + ": duplicate cell");
    seen[k] = true;
    image.values()[k] = cell.value;
  }
  return image;
}

}  // namespace baytomo
