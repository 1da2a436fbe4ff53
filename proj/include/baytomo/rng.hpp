#pragma once

#include <cstdint>
#include <random>

namespace baytomo {

/// Seeded generator used everywhere randomness enters a run.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard, seeded through std::seed_seq from (seed, stream). Uniforms take
/// the top 53 bits of one draw; normals use the polar-free Box-Muller form
/// and cache the second variate. Both transforms are written out here
/// because the standard library distributions are implementation-defined,
/// so draws are byte-for-byte reproducible on any conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for a numbered sub-stream of the same seed.
  Rng split(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace baytomo
