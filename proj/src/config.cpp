#include "baytomo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "baytomo/io.hpp"

namespace baytomo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line;
  os << ": " << what;
  throw ConfigError(os.str());
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw std::invalid_argument("expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Field real(std::string key, double RunConfig::*m) {
  return {std::move(key), [m](RunConfig& c, const std::string& v) { c.*m = parse_double(v); },
          [m](const RunConfig& c) { return format_real(c.*m); }};
}

template <typename S>
Field real_in(std::string key, S RunConfig::*s, double S::*m) {
  return {std::move(key), [s, m](RunConfig& c, const std::string& v) { (c.*s).*m = parse_double(v); },
          [s, m](const RunConfig& c) { return format_real((c.*s).*m); }};
}

template <typename S, typename T>
Field count_in(std::string key, S RunConfig::*s, T S::*m) {
  return {std::move(key), [s, m](RunConfig& c, const std::string& v) { (c.*s).*m = static_cast<T>(parse_u64(v)); },
          [s, m](const RunConfig& c) { return std::to_string((c.*s).*m); }};
}

template <typename T>
Field count(std::string key, T RunConfig::*m) {
  return {std::move(key), [m](RunConfig& c, const std::string& v) { c.*m = static_cast<T>(parse_u64(v)); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

template <typename S>
Field flag_in(std::string key, S RunConfig::*s, bool S::*m) {
  return {std::move(key), [s, m](RunConfig& c, const std::string& v) { (c.*s).*m = parse_bool(v); },
          [s, m](const RunConfig& c) { return fmt_bool((c.*s).*m); }};
}

Field text(std::string key, std::string RunConfig::*m) {
  return {std::move(key), [m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

Field phantom_real(std::string key, double PhantomSpec::*m) { return real_in(std::move(key), &RunConfig::phantom, m); }

Field attenuation(std::string key, double AttenuationTable::*m) {
  return {std::move(key), [m](RunConfig& c, const std::string& v) { c.phantom.values.*m = parse_double(v); },
          [m](const RunConfig& c) { return format_real(c.phantom.values.*m); }};
}

Field radius(std::string key, RadiusRange PhantomSpec::*r, double RadiusRange::*m) {
  return {std::move(key), [r, m](RunConfig& c, const std::string& v) { (c.phantom.*r).*m = parse_double(v); },
          [r, m](const RunConfig& c) { return format_real((c.phantom.*r).*m); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(text("run.command", &RunConfig::command));
    f.push_back(count("run.seed", &RunConfig::seed));
    f.push_back(text("run.output", &RunConfig::output));
    f.push_back({"run.estimator", [](RunConfig& c, const std::string& v) { c.estimator = parse_estimator(v); },
                 [](const RunConfig& c) { return to_string(c.estimator); }});
    f.push_back(count("run.chains", &RunConfig::chains));
    f.push_back(text("input.sinogram", &RunConfig::sinogram));
    f.push_back(text("input.truth", &RunConfig::truth));

    f.push_back({"phantom.kind", [](RunConfig& c, const std::string& v) { c.phantom.kind = parse_phantom_kind(v); },
                 [](const RunConfig& c) { return to_string(c.phantom.kind); }});
    f.push_back(count_in("phantom.side", &RunConfig::phantom, &PhantomSpec::side));
    f.push_back(phantom_real("phantom.pixel_size", &PhantomSpec::pixel_size));
    f.push_back(count_in("phantom.seed", &RunConfig::phantom, &PhantomSpec::seed));
    f.push_back(count("phantom.slice_index", &RunConfig::slice_index));
    f.push_back(count("phantom.slices", &RunConfig::slices));
    f.push_back(attenuation("phantom.background", &AttenuationTable::background));
    f.push_back(attenuation("phantom.wood", &AttenuationTable::wood));
    f.push_back(attenuation("phantom.rot", &AttenuationTable::rot));
    f.push_back(attenuation("phantom.knot", &AttenuationTable::knot));
    f.push_back(attenuation("phantom.metal", &AttenuationTable::metal));
    f.push_back(attenuation("phantom.matrix", &AttenuationTable::matrix));
    f.push_back(attenuation("phantom.pore", &AttenuationTable::pore));
    f.push_back(attenuation("phantom.cob", &AttenuationTable::cob));
    f.push_back(phantom_real("phantom.trunk_semi_x", &PhantomSpec::trunk_semi_x));
    f.push_back(phantom_real("phantom.trunk_semi_y", &PhantomSpec::trunk_semi_y));
    f.push_back(count_in("phantom.knots", &RunConfig::phantom, &PhantomSpec::knots));
    f.push_back(radius("phantom.knot_radius_min", &PhantomSpec::knot_radius, &RadiusRange::min));
    f.push_back(radius("phantom.knot_radius_max", &PhantomSpec::knot_radius, &RadiusRange::max));
    f.push_back(flag_in("phantom.with_rot", &RunConfig::phantom, &PhantomSpec::rot));
    f.push_back(radius("phantom.rot_radius_min", &PhantomSpec::rot_radius, &RadiusRange::min));
    f.push_back(radius("phantom.rot_radius_max", &PhantomSpec::rot_radius, &RadiusRange::max));
    f.push_back(flag_in("phantom.with_metal", &RunConfig::phantom, &PhantomSpec::metal));
    f.push_back(phantom_real("phantom.metal_half_x", &PhantomSpec::metal_half_x));
    f.push_back(phantom_real("phantom.metal_half_y", &PhantomSpec::metal_half_y));
    f.push_back(phantom_real("phantom.knot_sweep", &PhantomSpec::knot_sweep));
    f.push_back(phantom_real("phantom.core_radius", &PhantomSpec::core_radius));
    f.push_back(count_in("phantom.pores", &RunConfig::phantom, &PhantomSpec::pores));
    f.push_back(radius("phantom.pore_radius_min", &PhantomSpec::pore_radius, &RadiusRange::min));
    f.push_back(radius("phantom.pore_radius_max", &PhantomSpec::pore_radius, &RadiusRange::max));
    f.push_back(count_in("phantom.cobs", &RunConfig::phantom, &PhantomSpec::cobs));
    f.push_back(radius("phantom.cob_radius_min", &PhantomSpec::cob_radius, &RadiusRange::min));
    f.push_back(radius("phantom.cob_radius_max", &PhantomSpec::cob_radius, &RadiusRange::max));

    f.push_back(count("geometry.angles", &RunConfig::angles));
    f.push_back(count("geometry.detectors", &RunConfig::detectors));
    f.push_back(real("noise.fraction", &RunConfig::noise_fraction));
    f.push_back(count("noise.seed", &RunConfig::noise_seed));

    f.push_back({"prior.name", [](RunConfig& c, const std::string& v) { c.prior.name = v; },
                 [](const RunConfig& c) { return c.prior.name; }});
    f.push_back(real("prior.smoothing_beta", &RunConfig::smoothing_beta));

    f.push_back(count_in("lbfgs.memory", &RunConfig::lbfgs, &LbfgsSettings::memory));
    f.push_back(count_in("lbfgs.max_iterations", &RunConfig::lbfgs, &LbfgsSettings::max_iterations));
    f.push_back(real_in("lbfgs.grad_tol", &RunConfig::lbfgs, &LbfgsSettings::grad_tol));
    f.push_back(real_in("lbfgs.c1", &RunConfig::lbfgs, &LbfgsSettings::c1));
    f.push_back(real_in("lbfgs.c2", &RunConfig::lbfgs, &LbfgsSettings::c2));

    f.push_back(count_in("mwg.adapt", &RunConfig::mwg, &MwgSettings::adapt));
    f.push_back(count_in("mwg.samples", &RunConfig::mwg, &MwgSettings::samples));
    f.push_back(real_in("mwg.scale", &RunConfig::mwg, &MwgSettings::scale));
    f.push_back(real_in("mwg.epsilon_floor", &RunConfig::mwg, &MwgSettings::epsilon_floor));
    f.push_back(flag_in("mwg.random_order", &RunConfig::mwg, &MwgSettings::random_order));
    f.push_back(count_in("mwg.refresh_interval", &RunConfig::mwg, &MwgSettings::refresh_interval));
    f.push_back(count_in("mwg.diagnostics_every", &RunConfig::mwg, &MwgSettings::diagnostics_every));

    f.push_back(count_in("nuts.adapt", &RunConfig::nuts, &NutsSettings::adapt));
    f.push_back(count_in("nuts.samples", &RunConfig::nuts, &NutsSettings::samples));
    f.push_back(real_in("nuts.target_accept", &RunConfig::nuts, &NutsSettings::target_accept));
    f.push_back(count_in("nuts.max_depth", &RunConfig::nuts, &NutsSettings::max_depth));
    f.push_back(flag_in("nuts.diagonal_mass", &RunConfig::nuts, &NutsSettings::diagonal_mass));

    f.push_back({"gridsearch.parameter", [](RunConfig& c, const std::string& v) { c.gridsearch.parameter = v; },
                 [](const RunConfig& c) { return c.gridsearch.parameter; }});
    f.push_back({"gridsearch.candidates",
                 [](RunConfig& c, const std::string& v) {
                   c.gridsearch.candidates.clear();
                   for (const auto& item : split_list(v)) c.gridsearch.candidates.push_back(parse_double(item));
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> items;
                   for (double d : c.gridsearch.candidates) items.push_back(format_real(d));
                   return join(items);
                 }});
    f.push_back(real_in("gridsearch.lo", &RunConfig::gridsearch, &GridSearchSettings::lo));
    f.push_back(real_in("gridsearch.hi", &RunConfig::gridsearch, &GridSearchSettings::hi));
    f.push_back(count_in("gridsearch.count", &RunConfig::gridsearch, &GridSearchSettings::count));
    f.push_back({"gridsearch.truth", [](RunConfig& c, const std::string& v) { c.gridsearch.truth = v; },
                 [](const RunConfig& c) { return c.gridsearch.truth; }});
    f.push_back(count_in("gridsearch.tuning_seed", &RunConfig::gridsearch, &GridSearchSettings::tuning_seed));

    f.push_back({"stack.inputs", [](RunConfig& c, const std::string& v) { c.stack_inputs = split_list(v); },
                 [](const RunConfig& c) { return join(c.stack_inputs); }});
    f.push_back(real("stack.spacing", &RunConfig::stack_spacing));
    return f;
  }();
  return all;
}

}  // namespace

IniDocument parse_ini(const std::string& text, const std::string& source) {
  IniDocument doc;
  doc.source = source;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto cut = raw.find_first_of("#;");
    const std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(source, line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(source, line_no, "missing key");
    if (section.empty()) fail(source, line_no, "key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    if (doc.entries.count(full)) fail(source, line_no, "duplicate key '" + full + "'");
    doc.entries[full] = {trim(line.substr(eq + 1)), line_no};
  }
  return doc;
}

IniDocument load_ini(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str(), path.string());
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::map: return "map";
    case Estimator::mwg: return "mwg";
    case Estimator::nuts: return "nuts";
  }
  return "map";
}

Estimator parse_estimator(const std::string& text) {
  if (text == "map") return Estimator::map;
  if (text == "mwg") return Estimator::mwg;
  if (text == "nuts") return Estimator::nuts;
  throw std::invalid_argument("unknown estimator '" + text + "' (expected map, mwg or nuts)");
}

void RunConfig::validate() const {
  phantom.validate();
  if (slices == 0 || slice_index >= slices) throw std::invalid_argument("phantom.slice_index must be below phantom.slices");
  if (chains == 0) throw std::invalid_argument("run.chains must be positive");
  if (angles == 0) throw std::invalid_argument("geometry.angles must be positive");
  if (!(noise_fraction > 0.0) || !std::isfinite(noise_fraction)) throw std::invalid_argument("noise.fraction must be positive");
  if (smoothing_beta < 0.0 || !std::isfinite(smoothing_beta)) throw std::invalid_argument("prior.smoothing_beta must be >= 0");
  const auto& names = prior_names();
  if (std::find(names.begin(), names.end(), prior.name) == names.end()) {
    throw std::invalid_argument("unknown prior '" + prior.name + "'");
  }
  for (const auto& [k, v] : prior.params) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("prior." + k + " must be finite and >= 0");
  }
  if (lbfgs.memory == 0 || lbfgs.max_iterations == 0 || !(lbfgs.grad_tol > 0.0)) {
    throw std::invalid_argument("lbfgs memory, max_iterations and grad_tol must be positive");
  }
  if (!(0.0 < lbfgs.c1 && lbfgs.c1 < lbfgs.c2 && lbfgs.c2 < 1.0)) throw std::invalid_argument("lbfgs needs 0 < c1 < c2 < 1");
  if (estimator == Estimator::mwg && mwg.samples < 2) throw std::invalid_argument("mwg.samples must be at least 2");
  if (estimator == Estimator::nuts && nuts.samples < 2) throw std::invalid_argument("nuts.samples must be at least 2");
  if (!(mwg.scale > 0.0) || mwg.epsilon_floor < 0.0) throw std::invalid_argument("mwg.scale must be positive and epsilon_floor >= 0");
  if (mwg.refresh_interval == 0 || mwg.diagnostics_every == 0) {
    throw std::invalid_argument("mwg.refresh_interval and mwg.diagnostics_every must be positive");
  }
  if (!(nuts.target_accept > 0.0 && nuts.target_accept < 1.0)) throw std::invalid_argument("nuts.target_accept must be in (0, 1)");
  if (nuts.max_depth == 0 || nuts.max_depth > 30) throw std::invalid_argument("nuts.max_depth must be in [1, 30]");
  if (!(gridsearch.lo > 0.0 && gridsearch.hi >= gridsearch.lo) || gridsearch.count == 0) {
    throw std::invalid_argument("gridsearch needs 0 < lo <= hi and count > 0");
  }
  for (double c : gridsearch.candidates) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("gridsearch.candidates must be positive");
  }
  if (!(stack_spacing > 0.0)) throw std::invalid_argument("stack.spacing must be positive");
  for (const auto* path : {&sinogram, &truth, &gridsearch.truth}) {
    if (!path->empty() && !fs::exists(fs::path(*path + ".hdr"))) {
      throw std::invalid_argument("referenced artifact '" + *path + "' does not exist");
    }
  }
  for (const auto& p : stack_inputs) {
    if (!fs::exists(fs::path(p + ".hdr"))) throw std::invalid_argument("stack input '" + p + "' does not exist");
  }
}

RunConfig resolve_config(const IniDocument& doc) {
  RunConfig cfg;
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key[f.key] = &f;

  // prior.name first, so prior parameters can be checked against it.
  if (auto it = doc.entries.find("prior.name"); it != doc.entries.end()) cfg.prior.name = it->second.value;
  for (const auto& [key, entry] : doc.entries) {
    try {
      if (auto f = by_key.find(key); f != by_key.end()) {
        f->second->set(cfg, entry.value);
      } else if (key.rfind("prior.", 0) == 0) {
        set_prior_parameter(cfg.prior, key.substr(6), parse_double(entry.value), false);
      } else {
        fail(doc.source, entry.line, "unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(doc.source, entry.line, key + ": " + e.what());
    }
  }
  // A lone interior parameter also sets its boundary partner.
  for (const auto& [interior, boundary] : {std::pair{"alpha", "alpha_boundary"}, std::pair{"sigma_pr", "sigma_boundary"}}) {
    if (cfg.prior.params.count(interior) && !cfg.prior.params.count(boundary)) {
      cfg.prior.params[boundary] = cfg.prior.params[interior];
    }
  }
  try {
    cfg.validate();
    cfg.prior = resolve_prior_spec(cfg.prior, cfg.phantom.shape());
  } catch (const std::exception& e) {
    // Range checks name their key first; point at that line when it exists.
    const std::string what = e.what();
    const auto it = doc.entries.find(what.substr(0, what.find(' ')));
    fail(doc.source, it != doc.entries.end() ? it->second.line : 0, what);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) { return resolve_config(load_ini(path)); }

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(cfg) << '\n';
    if (f.key == "prior.smoothing_beta") {
      for (const auto& [k, v] : cfg.prior.params) out << k << " = " << format_real(v) << '\n';
    }
  }
  return out.str();
}

}  // namespace baytomo
