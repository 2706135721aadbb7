#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"
#include "vrjp/rng.hpp"

namespace vrjp {

/// Piecewise-constant path: states[k] is occupied on [epochs[k], epochs[k+1])
/// and the last state until `horizon`. epochs[0] == 0.
struct Trajectory {
  std::vector<Vertex> states;
  std::vector<double> epochs;
  double horizon = 0.0;

  std::size_t jump_count() const { return states.empty() ? 0 : states.size() - 1; }
  double sojourn(std::size_t k) const {
    return (k + 1 < epochs.size() ? epochs[k + 1] : horizon) - epochs[k];
  }
};

/// Throws std::invalid_argument unless states and epochs line up, epochs
/// start at 0 and increase strictly, horizon >= last epoch and consecutive
/// states are adjacent in `graph`.
void validate_trajectory(const WeightedGraph& graph, const Trajectory& traj);

/// Stop either at a fixed time or after a fixed number of jumps (horizon =
/// last epoch in that case).
struct StopRule {
  std::optional<double> time;
  std::optional<std::size_t> jumps;

  static StopRule at_time(double t) { return {t, std::nullopt}; }
  static StopRule after_jumps(std::size_t m) { return {std::nullopt, m}; }
};

/// Time spent at each vertex up to the horizon.
std::vector<double> occupation_times(const Trajectory& traj, std::size_t vertex_count);

/// L_i = theta_i + occupation time, on the original VRJP clock.
std::vector<double> vrjp_local_times(const WeightedGraph& graph, const Trajectory& traj);

/// Exact event-driven VRJP: at i the jump rate to j is W_{i,j} L_j, which is
/// frozen while the walk sits at i.
Trajectory simulate_vrjp(const WeightedGraph& graph, Vertex i0, const StopRule& stop, Rng& rng);
Trajectory simulate_vrjp(const WeightedGraph& graph, Vertex i0, const StopRule& stop, std::uint64_t seed);

/// Maps a VRJP path to the time-changed clock D(s) = sum_i (L_i(s)^2 - theta_i^2):
/// a sojourn of length u begun with local time l lasts u (2 l + u).
Trajectory time_change(const WeightedGraph& graph, const Trajectory& y);
Trajectory inverse_time_change(const WeightedGraph& graph, const Trajectory& z);

std::vector<Vertex> skeleton(const Trajectory& traj);

/// Linearly edge-reinforced walk; `graph` edge weights are the initial
/// weights. Returns steps + 1 vertices.
std::vector<Vertex> simulate_errw(const WeightedGraph& graph, Vertex i0, std::size_t steps, Rng& rng);
std::vector<Vertex> simulate_errw(const WeightedGraph& graph, Vertex i0, std::size_t steps, std::uint64_t seed);

/// Independent Gamma(a_e, 1) draws.
std::vector<double> sample_gamma_weights(std::span<const double> shapes, Rng& rng);
std::vector<double> sample_gamma_weights(std::span<const double> shapes, std::uint64_t seed);

/// Total jump rate out of each vertex for the walk with rates
/// W_{i,j} G(i0,j) / (2 G(i0,i)).
std::vector<double> quenched_sojourn_rates(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0);

/// Markov jump process with rates W_{i,j} G(i0,j) / (2 G(i0,i)).
Trajectory simulate_quenched_jump(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0,
                                  const StopRule& stop, Rng& rng);
Trajectory simulate_quenched_jump(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0,
                                  const StopRule& stop, std::uint64_t seed);

/// sum over edges of W_{i,j} (sqrt((S_i + theta_i^2)(S_j + theta_j^2)) - theta_i theta_j).
double edge_energy(const WeightedGraph& graph, std::span<const double> s);

/// Integrated escape rate of the time-changed process over each sojourn
/// (the exponent density_fZ accumulates), closed form per sojourn.
std::vector<double> fz_sojourn_exponents(const WeightedGraph& graph, const Trajectory& z);

/// Trajectory densities on the time-changed clock; the start vertex is
/// states[0]. The Z density multiplies the jump-time rate factors and the
/// integrated escape rate; the annealed one is the closed form obtained by
/// averaging the quenched density over the potential (eta must be 0).
double log_density_fZ(const WeightedGraph& graph, const Trajectory& z);
double log_density_fX_annealed(const WeightedGraph& graph, const Trajectory& z);
double log_density_fX_quenched(const WeightedGraph& graph, const GreenMatrix& g, std::span<const double> beta,
                               const Trajectory& z);
double density_fZ(const WeightedGraph& graph, const Trajectory& z);
double density_fX_annealed(const WeightedGraph& graph, const Trajectory& z);
/// Throws NotPositiveDefinite when H_beta is not positive definite.
double density_fX_quenched(const WeightedGraph& graph, std::span<const double> beta, const Trajectory& z);

/// CSV with header "epoch,state"; the final row repeats the last state at the horizon.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace vrjp
