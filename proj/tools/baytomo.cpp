// baytomo: simulate sparse-angle sinograms and reconstruct them under
// Gaussian, TV, Besov and Cauchy priors.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "baytomo/config.hpp"
#include "baytomo/parallel.hpp"
#include "baytomo/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> prior;
  std::optional<std::size_t> angles;
  std::optional<std::string> estimator;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "INI run configuration (defaults apply when omitted)");
  sub->add_option("--seed", o.seed, "Master seed; overrides run.seed");
  sub->add_option("--out", o.out, "Output directory; overrides run.output");
  sub->add_option("--prior", o.prior, "gaussian|tv|tv_iso|besov|cauchy|cauchy_sheet");
  sub->add_option("--angles", o.angles, "Number of equispaced projection angles");
}

baytomo::RunConfig load(const std::string& command, const Overrides& o) {
  baytomo::IniDocument doc = o.config.empty() ? baytomo::IniDocument{"<defaults>", {}} : baytomo::load_ini(o.config);
  auto set = [&](const std::string& key, const std::string& value) { doc.entries[key] = {value, 0}; };
  set("run.command", command);
  if (o.seed) set("run.seed", std::to_string(*o.seed));
  if (o.out) set("run.output", *o.out);
  if (o.angles) set("geometry.angles", std::to_string(*o.angles));
  if (o.estimator) set("run.estimator", *o.estimator);
  if (o.prior) {
    const auto old = doc.entries.find("prior.name");
    if (old == doc.entries.end() || old->second.value != *o.prior) {
      // Parameters of the configured prior do not carry over to another one.
      for (auto it = doc.entries.begin(); it != doc.entries.end();) {
        const bool drop = it->first.rfind("prior.", 0) == 0 && it->first != "prior.smoothing_beta";
        it = drop ? doc.entries.erase(it) : std::next(it);
      }
    }
    set("prior.name", *o.prior);
  }
  if (command == "map") set("run.estimator", "map");
  return baytomo::resolve_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian sparse-angle X-ray tomography"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "Generate a phantom and its noisy sinogram");
  auto* map = app.add_subcommand("map", "MAP reconstruction by L-BFGS");
  auto* sample = app.add_subcommand("sample", "MCMC reconstruction (CM and pixel-wise variance) started from MAP");
  auto* gridsearch = app.add_subcommand("gridsearch", "Pick a prior parameter by relative L2 error to a truth image");
  auto* stack = app.add_subcommand("stack", "Stack 2D slice images into a volume");
  for (auto* sub : {simulate, map, sample, gridsearch, stack}) add_common(sub, o);
  sample->add_option("--estimator", o.estimator, "mwg|nuts (map is rejected)");
  map->add_option("--estimator", o.estimator, "Only map is accepted here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  baytomo::configure_threads_from_env();
  const std::string command = app.get_subcommands().front()->get_name();
  baytomo::RunConfig cfg;
  try {
    if (command == "map" && o.estimator && *o.estimator != "map") {
      throw baytomo::ConfigError("map: --estimator must be map; use the sample command for mwg or nuts");
    }
    cfg = load(command, o);
    if (command == "sample" && cfg.estimator == baytomo::Estimator::map) {
      throw baytomo::ConfigError("sample needs run.estimator (or --estimator) set to mwg or nuts");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (command == "simulate") baytomo::run_simulate(cfg, std::cout);
    else if (command == "map" || command == "sample") baytomo::run_reconstruct(cfg, std::cout);
    else if (command == "gridsearch") baytomo::run_gridsearch(cfg, std::cout);
    else baytomo::run_stack(cfg, std::cout);
  } catch (const baytomo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
