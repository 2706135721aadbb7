#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrjp/graph.hpp"

namespace vrjp {

/// Exit statuses of a run.
inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_stat_fail = 3;

/// PASS/FAIL thresholds; all overridable from the config document.
struct Tolerances {
  double se_multiple = 4.0;        // |estimate - oracle| <= k SE
  double p_min = 0.01;             // distributional tests
  double expansion_tol = 1e-8;     // path expansion vs inverse
  double identity_tol = 1e-10;     // H G = I
  double eigen_tol = 1e-8;         // eigen residuals
  double tau_target = 0.5;
  double tau_tol = 0.02;
  double r_squared_min = 0.9;
  double monotone_se = 2.0;        // allowed rise between neighbouring distances
};

/// Graph description. kind: box | path | cycle | triangle | star | edges.
/// `weight` is W (or the initial ERRW weight a); `gamma_shape`, when set,
/// replaces W on a box by i.i.d. Gamma(shape, 1) draws. `exterior_field`
/// gives an unwired box the field eta_i = theta W (missing neighbours of i),
/// i.e. the box as a finite marginal of the lattice.
struct GraphConfig {
  std::string kind = "path";
  int dimension = 1;
  int half_side = 1;
  bool wired = false;
  bool exterior_field = false;
  std::size_t size = 3;
  double weight = 1.0;
  std::optional<double> gamma_shape;
  double theta = 1.0;
  nlohmann::json explicit_graph;  // graph_to_json document for kind == "edges"
};

struct ExperimentConfig {
  std::string command;
  std::string variant;  // simulate: vrjp | errw | quenched
  GraphConfig graph;
  std::optional<std::uint64_t> seed;
  std::string out;  // empty: standard output
  int workers = 0;

  std::size_t n_samples = 0;
  double exponent = 0.25;
  std::size_t prefix_len = 3;  // jumps after the start vertex
  std::vector<std::vector<int>> targets;
  std::vector<double> k;  // empty: 0.5 on every vertex
  Vertex i0 = 0;
  std::optional<Vertex> l;
  std::optional<double> time;
  std::optional<std::size_t> jumps;
  bool time_changed = false;
  int max_len = 200;
  int d = 1;
  std::vector<double> thetas;
  std::vector<double> d0s;
  bool detail = false;
  Tolerances tol;
};

const std::vector<std::string>& command_names();

/// Defaults of a subcommand. Throws std::invalid_argument for an unknown name.
ExperimentConfig default_config(const std::string& command);

/// Overlays the fields present in `doc` onto `base`. Unknown or ill-typed
/// fields throw std::invalid_argument.
ExperimentConfig apply_config(ExperimentConfig base, const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Builds the graph a config describes (deterministic weights only; a
/// gamma weight law is resolved per replica by the commands that use it).
WeightedGraph build_graph(const GraphConfig& g);

struct RunResult {
  int exit_code = exit_ok;
  std::string csv;      // header row, LF line endings
  std::string summary;  // one line starting with PASS, FAIL or OK
};

/// Runs one subcommand. Invalid configurations give exit_invalid with the
/// diagnostic in `summary`; a failed statistical check gives exit_stat_fail.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace vrjp
