#include "vrjp/process.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vrjp {

void validate_trajectory(const WeightedGraph& graph, const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("trajectory has no states");
  if (traj.epochs.size() != traj.states.size()) throw std::invalid_argument("one epoch per state required");
  if (traj.epochs.front() != 0.0) throw std::invalid_argument("first epoch must be 0");
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (traj.states[k] >= graph.vertex_count()) throw std::invalid_argument("state out of range");
    if (k > 0) {
      if (!(traj.epochs[k] > traj.epochs[k - 1])) throw std::invalid_argument("epochs must increase strictly");
      if (graph.weight(traj.states[k - 1], traj.states[k]) <= 0.0)
        throw std::invalid_argument("consecutive states are not adjacent");
    }
  }
  if (!(traj.horizon >= traj.epochs.back()) || !std::isfinite(traj.horizon))
    throw std::invalid_argument("horizon before the last epoch");
}

namespace {

void check_stop(const StopRule& stop) {
  if (stop.time.has_value() == stop.jumps.has_value())
    throw std::invalid_argument("stop rule needs exactly one of time or jumps");
  if (stop.time && !(*stop.time >= 0.0)) throw std::invalid_argument("stop time must be >= 0");
  if (stop.jumps && *stop.jumps == 0) throw std::invalid_argument("jump count must be >= 1");
}

void check_vertex(const WeightedGraph& graph, Vertex v) {
  if (v >= graph.vertex_count()) throw std::invalid_argument("start vertex out of range");
}

// Shared driver: `rates(i, out)` fills the jump rates to the neighbours of i
// (in adjacency order) and returns their sum; `after(i, dt)` is told how
// long the walk stayed at i.
template <class Rates, class After>
Trajectory run_jump_process(const WeightedGraph& graph, Vertex i0, const StopRule& stop, Rng& rng, Rates&& rates,
                            After&& after) {
  check_stop(stop);
  check_vertex(graph, i0);
  Trajectory traj;
  traj.states.push_back(i0);
  traj.epochs.push_back(0.0);
  std::vector<double> r;
  double t = 0.0;
  Vertex i = i0;
  for (;;) {
    const auto nbrs = graph.neighbors(i);
    r.assign(nbrs.size(), 0.0);
    const double total = rates(i, r);
    if (!(total > 0.0)) {
      // No way out (single vertex): the walk sits still until the horizon.
      if (stop.jumps) throw std::invalid_argument("cannot make jumps from an isolated vertex");
      after(i, *stop.time - t);
      traj.horizon = *stop.time;
      return traj;
    }
    const double hold = rng.exponential(total);
    if (stop.time && t + hold >= *stop.time) {
      after(i, *stop.time - t);
      traj.horizon = *stop.time;
      return traj;
    }
    after(i, hold);
    t += hold;
    const std::size_t pick = rng.categorical(r, total);
    i = nbrs[pick].vertex;
    traj.states.push_back(i);
    traj.epochs.push_back(t);
    if (stop.jumps && traj.jump_count() == *stop.jumps) {
      traj.horizon = t;
      return traj;
    }
  }
}

}  // namespace

std::vector<double> occupation_times(const Trajectory& traj, std::size_t vertex_count) {
  std::vector<double> s(vertex_count, 0.0);
  for (std::size_t k = 0; k < traj.states.size(); ++k) s[traj.states[k]] += traj.sojourn(k);
  return s;
}

std::vector<double> vrjp_local_times(const WeightedGraph& graph, const Trajectory& traj) {
  std::vector<double> l = occupation_times(traj, graph.vertex_count());
  const auto theta = graph.theta();
  for (std::size_t i = 0; i < l.size(); ++i) l[i] += theta[i];
  return l;
}

Trajectory simulate_vrjp(const WeightedGraph& graph, Vertex i0, const StopRule& stop, Rng& rng) {
  std::vector<double> local(graph.theta().begin(), graph.theta().end());
  return run_jump_process(
      graph, i0, stop, rng,
      [&](Vertex i, std::vector<double>& r) {
        double total = 0.0;
        const auto nbrs = graph.neighbors(i);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          r[k] = nbrs[k].weight * local[nbrs[k].vertex];
          total += r[k];
        }
        return total;
      },
      [&](Vertex i, double dt) { local[i] += dt; });
}

Trajectory simulate_vrjp(const WeightedGraph& graph, Vertex i0, const StopRule& stop, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_vrjp(graph, i0, stop, rng);
}

Trajectory time_change(const WeightedGraph& graph, const Trajectory& y) {
  validate_trajectory(graph, y);
  std::vector<double> local(graph.theta().begin(), graph.theta().end());
  Trajectory z;
  z.states = y.states;
  z.epochs.reserve(y.epochs.size());
  double t = 0.0;
  for (std::size_t k = 0; k < y.states.size(); ++k) {
    z.epochs.push_back(t);
    const double u = y.sojourn(k);
    const double l = local[y.states[k]];
    t += u * (2.0 * l + u);
    local[y.states[k]] = l + u;
  }
  z.horizon = t;
  return z;
}

Trajectory inverse_time_change(const WeightedGraph& graph, const Trajectory& z) {
  validate_trajectory(graph, z);
  std::vector<double> local(graph.theta().begin(), graph.theta().end());
  Trajectory y;
  y.states = z.states;
  y.epochs.reserve(z.epochs.size());
  double t = 0.0;
  for (std::size_t k = 0; k < z.states.size(); ++k) {
    y.epochs.push_back(t);
    const double e = z.sojourn(k);
    const double l = local[z.states[k]];
    const double u = e / (std::sqrt(l * l + e) + l);
    t += u;
    local[z.states[k]] = l + u;
  }
  y.horizon = t;
  return y;
}

std::vector<Vertex> skeleton(const Trajectory& traj) { return traj.states; }

std::vector<Vertex> simulate_errw(const WeightedGraph& graph, Vertex i0, std::size_t steps, Rng& rng) {
  check_vertex(graph, i0);
  std::vector<double> weight;
  weight.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) weight.push_back(e.weight);
  std::vector<Vertex> path{i0};
  path.reserve(steps + 1);
  std::vector<double> r;
  Vertex i = i0;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto nbrs = graph.neighbors(i);
    if (nbrs.empty()) throw std::invalid_argument("cannot step from an isolated vertex");
    r.resize(nbrs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) total += (r[k] = weight[nbrs[k].edge]);
    const Neighbor& nb = nbrs[rng.categorical(r, total)];
    weight[nb.edge] += 1.0;
    i = nb.vertex;
    path.push_back(i);
  }
  return path;
}

std::vector<Vertex> simulate_errw(const WeightedGraph& graph, Vertex i0, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_errw(graph, i0, steps, rng);
}

std::vector<double> sample_gamma_weights(std::span<const double> shapes, Rng& rng) {
  std::vector<double> w;
  w.reserve(shapes.size());
  for (double a : shapes) {
    if (!(a > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    double x = 0.0;
    // A shape far below 1 can underflow to exactly 0; weights must stay positive.
    do x = rng.gamma(a);
    while (!(x > 0.0));
    w.push_back(x);
  }
  return w;
}

std::vector<double> sample_gamma_weights(std::span<const double> shapes, std::uint64_t seed) {
  Rng rng(seed);
  return sample_gamma_weights(shapes, rng);
}

std::vector<double> quenched_sojourn_rates(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0) {
  check_vertex(graph, i0);
  std::vector<double> out(graph.vertex_count(), 0.0);
  for (Vertex i = 0; i < out.size(); ++i) {
    double total = 0.0;
    for (const Neighbor& nb : graph.neighbors(i)) total += 0.5 * nb.weight * g(i0, nb.vertex);
    out[i] = total / g(i0, i);
  }
  return out;
}

Trajectory simulate_quenched_jump(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0, const StopRule& stop,
                                  Rng& rng) {
  check_vertex(graph, i0);
  if (g.size() != static_cast<Eigen::Index>(graph.vertex_count()))
    throw std::invalid_argument("Green matrix does not match the graph");
  return run_jump_process(
      graph, i0, stop, rng,
      [&](Vertex i, std::vector<double>& r) {
        double total = 0.0;
        const auto nbrs = graph.neighbors(i);
        const double gi = g(i0, i);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
          r[k] = 0.5 * nbrs[k].weight * g(i0, nbrs[k].vertex) / gi;
          total += r[k];
        }
        return total;
      },
      [](Vertex, double) {});
}

Trajectory simulate_quenched_jump(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0, const StopRule& stop,
                                  std::uint64_t seed) {
  Rng rng(seed);
  return simulate_quenched_jump(graph, g, i0, stop, rng);
}

namespace {

// sqrt(a + d) - sqrt(a) for a > 0, d >= 0.
double root_increment(double a, double d) { return d / (std::sqrt(a + d) + std::sqrt(a)); }

double log_jump_weights(const WeightedGraph& graph, const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k)
    s += std::log(0.5 * graph.weight(traj.states[k - 1], traj.states[k]));
  return s;
}

}  // namespace

double edge_energy(const WeightedGraph& graph, std::span<const double> s) {
  const auto theta = graph.theta();
  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    const double a = theta[e.u] * theta[e.u];
    const double b = theta[e.v] * theta[e.v];
    const double x = s[e.u];
    const double y = s[e.v];
    total += e.weight * (x * b + y * a + x * y) / (std::sqrt((a + x) * (b + y)) + theta[e.u] * theta[e.v]);
  }
  return total;
}

std::vector<double> fz_sojourn_exponents(const WeightedGraph& graph, const Trajectory& z) {
  validate_trajectory(graph, z);
  const auto theta = graph.theta();
  std::vector<double> s(graph.vertex_count(), 0.0);
  std::vector<double> out;
  out.reserve(z.states.size());
  for (std::size_t k = 0; k < z.states.size(); ++k) {
    const Vertex i = z.states[k];
    const double d = z.sojourn(k);
    // Rate at local time s_i + tau is sum_j W sqrt(S_j + theta_j^2) / (2 sqrt(s_i + tau + theta_i^2)).
    double field = 0.0;
    for (const Neighbor& nb : graph.neighbors(i))
      field += nb.weight * std::sqrt(s[nb.vertex] + theta[nb.vertex] * theta[nb.vertex]);
    out.push_back(field * root_increment(s[i] + theta[i] * theta[i], d));
    s[i] += d;
  }
  return out;
}

double log_density_fZ(const WeightedGraph& graph, const Trajectory& z) {
  validate_trajectory(graph, z);
  const auto theta = graph.theta();
  std::vector<double> s(graph.vertex_count(), 0.0);
  double log_f = 0.0;
  for (std::size_t k = 0; k < z.states.size(); ++k) {
    const Vertex i = z.states[k];
    s[i] += z.sojourn(k);
    if (k + 1 < z.states.size()) {
      const Vertex j = z.states[k + 1];
      log_f += std::log(0.5 * graph.weight(i, j)) +
               0.5 * (std::log(s[j] + theta[j] * theta[j]) - std::log(s[i] + theta[i] * theta[i]));
    }
  }
  for (double e : fz_sojourn_exponents(graph, z)) log_f -= e;
  return log_f;
}

double log_density_fX_annealed(const WeightedGraph& graph, const Trajectory& z) {
  validate_trajectory(graph, z);
  if (!graph.eta_is_zero()) throw std::invalid_argument("annealed density is stated for eta == 0");
  const auto theta = graph.theta();
  const std::vector<double> s = occupation_times(z, graph.vertex_count());
  const Vertex i0 = z.states.front();
  const Vertex in = z.states.back();
  double log_f = log_jump_weights(graph, z);
  for (Vertex i = 0; i < s.size(); ++i) {
    if (i != i0) log_f += std::log(theta[i]);
    if (i != in) log_f -= 0.5 * std::log(s[i] + theta[i] * theta[i]);
  }
  return log_f - edge_energy(graph, s);
}

double log_density_fX_quenched(const WeightedGraph& graph, const GreenMatrix& g, std::span<const double> beta,
                               const Trajectory& z) {
  validate_trajectory(graph, z);
  const std::vector<double> s = occupation_times(z, graph.vertex_count());
  const Vertex i0 = z.states.front();
  const Vertex in = z.states.back();
  double exponent = s[i0] / (2.0 * g(i0, i0));
  for (std::size_t i = 0; i < s.size(); ++i) exponent -= s[i] * beta[i];
  return log_jump_weights(graph, z) + std::log(g(i0, in)) - std::log(g(i0, i0)) + exponent;
}

double density_fZ(const WeightedGraph& graph, const Trajectory& z) { return std::exp(log_density_fZ(graph, z)); }

double density_fX_annealed(const WeightedGraph& graph, const Trajectory& z) {
  return std::exp(log_density_fX_annealed(graph, z));
}

double density_fX_quenched(const WeightedGraph& graph, std::span<const double> beta, const Trajectory& z) {
  const GreenMatrix g = green(assemble_h(graph, beta));
  return std::exp(log_density_fX_quenched(graph, g, beta, z));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  char buf[64];
  out << "epoch,state\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.epochs[k]);
    out << buf << ',' << traj.states[k] << '\n';
  }
  if (!traj.states.empty()) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.horizon);
    out << buf << ',' << traj.states.back() << '\n';
  }
}

}  // namespace vrjp
