#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "baytomo/phantoms.hpp"
#include "baytomo/priors.hpp"

namespace baytomo {

namespace fs = std::filesystem;

/// Invalid configuration; the message names the file and line when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed INI text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Keys are stored as "section.key".
struct IniDocument {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::string source;
  std::map<std::string, Entry> entries;
};

IniDocument parse_ini(const std::string& text, const std::string& source = "<string>");
IniDocument load_ini(const fs::path& path);

enum class Estimator { map, mwg, nuts };
std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& text);

struct LbfgsSettings {
  std::size_t memory = 10;
  std::size_t max_iterations = 2000;
  double grad_tol = 1e-6;
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct MwgSettings {
  std::size_t adapt = 50000;
  std::size_t samples = 40000;
  double scale = 2.4;
  /// 0: 1e-8 of the dynamic range.
  double epsilon_floor = 0.0;
  bool random_order = false;
  std::size_t refresh_interval = 100000;
  std::size_t diagnostics_every = 10;
};

struct NutsSettings {
  std::size_t adapt = 100;
  std::size_t samples = 400;
  double target_accept = 0.8;
  std::size_t max_depth = 10;
  /// Run a preliminary chain and use its variance as the inverse mass.
  bool diagonal_mass = false;
};

struct GridSearchSettings {
  std::string parameter;  // empty: the prior's main parameter
  std::vector<double> candidates;  // empty: log-spaced lo..hi
  double lo = 1e-3;
  double hi = 1e3;
  std::size_t count = 13;
  /// Image stem scored against instead of the reconstruction truth.
  std::string truth;
  /// With truth empty: >0 scores against a log phantom with this seed and no metal.
  std::uint64_t tuning_seed = 0;
};

/// Fully resolved run description. Every field has a value after load, so
/// to_ini() writes a lock file from which the run is reproduced exactly.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string output = "out";
  Estimator estimator = Estimator::map;
  /// Independent sampler chains, run in parallel and merged.
  std::size_t chains = 1;

  /// Sinogram stem to reconstruct instead of simulating one.
  std::string sinogram;
  /// Truth image stem used instead of the phantom.
  std::string truth;

  PhantomSpec phantom;
  std::size_t slice_index = 0;
  std::size_t slices = 1;

  std::size_t angles = 30;
  std::size_t detectors = 0;  // 0: grid side
  double noise_fraction = 0.015;
  std::uint64_t noise_seed = 0;  // 0: follow seed

  PriorSpec prior;
  /// Charbonnier scale for gradient-based estimators; 0 picks the default
  /// from the dynamic range of the data.
  double smoothing_beta = 0.0;

  LbfgsSettings lbfgs;
  MwgSettings mwg;
  NutsSettings nuts;
  GridSearchSettings gridsearch;

  std::vector<std::string> stack_inputs;
  double stack_spacing = 1.0;

  std::uint64_t resolved_noise_seed() const { return noise_seed != 0 ? noise_seed : seed; }
  void validate() const;
};

/// Builds a RunConfig from defaults and the document; unknown sections or
/// keys and malformed values raise ConfigError with the line number.
RunConfig resolve_config(const IniDocument& doc);
RunConfig load_config(const fs::path& path);
std::string to_ini(const RunConfig& cfg);

}  // namespace baytomo
