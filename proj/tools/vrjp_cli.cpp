// Command-line runner: one subcommand per experiment, CSV on --out or stdout,
// one PASS/FAIL/OK line on stderr.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vrjp/experiments.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::optional<std::size_t> samples;
  std::optional<int> d;
  std::string variant;
  bool print_config = false;
};

const std::map<std::string, std::string> descriptions{
    {"sample-potential", "draw potentials beta and print them per vertex"},
    {"ward-check", "Laplace transform and Ward identities: Monte-Carlo against closed forms"},
    {"green-check", "Green function by inversion against the truncated random-walk expansion"},
    {"simulate", "simulate one path: vrjp, errw or quenched"},
    {"mixture-test", "time-changed VRJP against the annealed quenched walk (path-prefix chi-square)"},
    {"errw-equivalence", "ERRW against VRJP with Gamma edge weights (path-prefix chi-square)"},
    {"fractional-decay", "E[G(0,x)^s] on a wired box and its exponential decay fit"},
    {"thresholds", "recurrence threshold numbers and the printed comparators"},
    {"localization", "eigenvector IPR and localization lengths of H"},
    {"tau-check", "edge exponent of the single-site conditional law"},
    {"variance-check", "Monte-Carlo variance of beta at the centre of a wired box"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VRJP / random Schroedinger operator experiments"};
  app.set_help_all_flag("--help-all", "Expand all help");
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : vrjp::command_names()) {
    const auto it = descriptions.find(name);
    CLI::App* sub = app.add_subcommand(name, it == descriptions.end() ? "" : it->second);
    sub->add_option("--config", flags.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed (required for Monte-Carlo commands)");
    sub->add_option("--out", flags.out, "CSV output path (default: stdout)");
    sub->add_option("--workers", flags.workers, "OpenMP workers (0 = runtime default)");
    sub->add_option("--samples", flags.samples, "replica count");
    sub->add_flag("--print-config", flags.print_config, "print the effective config as JSON and exit");
    if (name == "thresholds") sub->add_option("--d", flags.d, "lattice dimension");
    if (name == "simulate") sub->add_option("variant", flags.variant, "vrjp | errw | quenched");
    subs[name] = sub;
  }

  if (argc < 2) {
    std::cerr << app.help();
    return vrjp::exit_invalid;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vrjp::exit_invalid;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  if (command.empty()) {
    std::cerr << app.help();
    return vrjp::exit_invalid;
  }

  vrjp::ExperimentConfig config;
  try {
    config = vrjp::default_config(command);
    if (!flags.config_path.empty()) {
      std::ifstream in(flags.config_path);
      const auto doc = nlohmann::json::parse(in);
      config = vrjp::apply_config(config, doc);
    }
  } catch (const std::exception& e) {
    std::cerr << "ERROR invalid config: " << e.what() << '\n';
    return vrjp::exit_invalid;
  }
  if (flags.seed) config.seed = flags.seed;
  if (!flags.out.empty()) config.out = flags.out;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.samples) config.n_samples = *flags.samples;
  if (flags.d) config.d = *flags.d;
  if (!flags.variant.empty()) config.variant = flags.variant;

  if (flags.print_config) {
    std::cout << vrjp::config_to_json(config).dump(2) << '\n';
    return vrjp::exit_ok;
  }

  const vrjp::RunResult result = vrjp::run_experiment(config);
  if (!result.csv.empty()) {
    if (config.out.empty()) {
      std::cout << result.csv;
    } else {
      std::ofstream out(config.out, std::ios::binary);
      if (!out) {
        std::cerr << "ERROR cannot open " << config.out << '\n';
        return vrjp::exit_invalid;
      }
      out << result.csv;
    }
  }
  std::cerr << result.summary << '\n';
  return result.exit_code;
}
