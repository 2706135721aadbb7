#include "vrjp/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vrjp/replicas.hpp"

namespace vrjp {

double gig_density(const GigParams& p, double x) {
  if (!(x > 0.0)) return 0.0;
  const double log_norm = 0.5 * std::log(p.a / (2.0 * std::numbers::pi)) + std::sqrt(p.a * p.b);
  return std::exp(log_norm - 0.5 * std::log(x) - 0.5 * (p.a * x + p.b / x));
}

double sample_gig(const GigParams& p, Rng& rng) {
  if (!(p.a > 0.0)) throw std::invalid_argument("GIG parameter a must be positive");
  if (!(p.b >= 0.0)) throw std::invalid_argument("GIG parameter b must be non-negative");
  // X ~ IG(mu = 1/m, shape a) and the draw is 1/X. The two roots of the
  // MSH quadratic are x1 = 1/r and x2 = mu^2 r; everything below is in terms
  // of m = sqrt(b/a) so that b = 0 is a regular point.
  const double m = std::sqrt(p.b / p.a);
  const double nu = rng.normal();
  const double y = nu * nu;
  const double r = m + y / (2.0 * p.a) + std::sqrt(4.0 * p.a * y * m + y * y) / (2.0 * p.a);
  if (m == 0.0) return r;
  const double u = rng.uniform();
  if (u * (r + m) <= r) return r;
  return m * m / r;
}

double log_density_nu(const WeightedGraph& graph, std::span<const double> beta) {
  const std::size_t n = graph.vertex_count();
  if (beta.size() != n) throw std::invalid_argument("beta needs one entry per vertex");
  for (double b : beta)
    if (!std::isfinite(b)) throw std::invalid_argument("beta must be finite");
  const SchrodingerMatrix h = assemble_h(graph, beta);
  Eigen::LLT<Eigen::MatrixXd> llt(h.values);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd l = llt.matrixL();
  if (!(l.diagonal().minCoeff() > 0.0)) return -std::numeric_limits<double>::infinity();

  const auto theta_span = graph.theta();
  const auto eta_span = graph.eta();
  const Eigen::Map<const Eigen::VectorXd> theta(theta_span.data(), static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> eta(eta_span.data(), static_cast<Eigen::Index>(n));
  const double quad_theta = theta.dot(h.values * theta);
  const double quad_eta = graph.eta_is_zero() ? 0.0 : eta.dot(llt.solve(eta));
  const double cross = theta.dot(eta);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return 0.5 * static_cast<double>(n) * std::log(2.0 / std::numbers::pi) + theta.array().log().sum() -
         0.5 * (quad_theta + quad_eta - 2.0 * cross) - 0.5 * log_det;
}

double density_nu(const WeightedGraph& graph, std::span<const double> beta) {
  return std::exp(log_density_nu(graph, beta));
}

std::vector<Vertex> default_elimination_order(const WeightedGraph& graph) {
  std::vector<Vertex> order(graph.vertex_count());
  for (Vertex v = 0; v < order.size(); ++v) order[v] = v;
  return order;
}

namespace {

void check_order(const WeightedGraph& graph, std::span<const Vertex> order) {
  const std::size_t n = graph.vertex_count();
  if (order.size() != n) throw std::invalid_argument("elimination order must cover every vertex");
  std::vector<bool> seen(n, false);
  for (Vertex v : order) {
    if (v >= n || seen[v]) throw std::invalid_argument("elimination order is not a permutation");
    seen[v] = true;
  }
}

}  // namespace

PotentialSample sample_nu(const WeightedGraph& graph, Rng& rng, std::span<const Vertex> order_in,
                          const SamplerOptions& options) {
  const std::size_t n = graph.vertex_count();
  std::vector<Vertex> order = order_in.empty() ? default_elimination_order(graph)
                                               : std::vector<Vertex>(order_in.begin(), order_in.end());
  check_order(graph, order);
  std::vector<std::size_t> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[order[p]] = p;

  const auto theta = graph.theta();
  const auto eta = graph.eta();

  // field[v] = eta_v + sum of W_{v,m} theta_m over neighbours m placed after
  // the current step: the boundary field of v in the marginal of the first
  // k vertices. Recomputed rather than decremented so no cancellation creeps in.
  std::vector<double> field(n, 0.0);
  auto refresh_field = [&](Vertex v, std::size_t step) {
    double f = eta[v];
    for (const Neighbor& nb : graph.neighbors(v))
      if (pos[nb.vertex] > step) f += nb.weight * theta[nb.vertex];
    field[v] = f;
  };

  Eigen::MatrixXd g_hat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  std::vector<double> beta(n, 0.0);
  std::vector<std::pair<std::size_t, double>> back;  // (position, W) of earlier neighbours

  for (std::size_t p = 0; p < n; ++p) {
    const Vertex v = order[p];
    back.clear();
    for (const Neighbor& nb : graph.neighbors(v)) {
      if (pos[nb.vertex] < p) {
        back.emplace_back(pos[nb.vertex], nb.weight);
        refresh_field(nb.vertex, p);
      }
    }
    refresh_field(v, p);

    const Eigen::Index s = static_cast<Eigen::Index>(p);
    // u = G_hat w, q = <w, G_hat w>, eta_check = field_v + <u, field_S>.
    double q = 0.0;
    double eta_check = field[v];
    if (s > 0) {
      u.head(s).setZero();
      for (const auto& [j, w] : back) u.head(s) += w * g_hat.col(static_cast<Eigen::Index>(j)).head(s);
      for (const auto& [j, w] : back) q += w * u(static_cast<Eigen::Index>(j));
      for (Eigen::Index i = 0; i < s; ++i) eta_check += u(i) * field[order[static_cast<std::size_t>(i)]];
    }
    if (!(eta_check >= -1e-12 * (1.0 + std::abs(field[v]))))
      throw std::logic_error("negative eta_check in sequential sampler");
    eta_check = std::max(eta_check, 0.0);

    const double gamma = sample_gig({2.0 * theta[v] * theta[v], 0.5 * eta_check * eta_check}, rng);
    beta[v] = gamma + 0.5 * q;

    // Schur update: the new pivot is 2 gamma.
    const double inv_s = 1.0 / (2.0 * gamma);
    if (!std::isfinite(inv_s) || !(inv_s > 0.0))
      throw std::logic_error("non-positive Schur complement in sequential sampler");
    if (s > 0) {
      g_hat.topLeftCorner(s, s).noalias() += inv_s * u.head(s) * u.head(s).transpose();
      g_hat.col(s).head(s) = inv_s * u.head(s);
      g_hat.row(s).head(s) = inv_s * u.head(s).transpose();
    }
    g_hat(s, s) = inv_s;

    if (options.verify_each_step) {
      const Eigen::Index k = s + 1;
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const Vertex vi = order[static_cast<std::size_t>(i)];
        h(i, i) = 2.0 * beta[vi];
        for (const Neighbor& nb : graph.neighbors(vi))
          if (pos[nb.vertex] < static_cast<std::size_t>(k)) h(i, static_cast<Eigen::Index>(pos[nb.vertex])) = -nb.weight;
      }
      const Eigen::MatrixXd gk = g_hat.topLeftCorner(k, k);
      const double residual = (h * gk - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, h.cwiseAbs().maxCoeff() * gk.cwiseAbs().maxCoeff());
      if (residual > 1e-10 * scale)
        throw std::logic_error("H G != I in sequential sampler (residual " + std::to_string(residual) + ")");
    }
  }
  return PotentialSample{std::move(beta), std::move(order), 0};
}

PotentialSample sample_nu(const WeightedGraph& graph, std::uint64_t seed, std::span<const Vertex> order,
                          const SamplerOptions& options) {
  Rng rng(seed);
  PotentialSample s = sample_nu(graph, rng, order, options);
  s.seed = seed;
  return s;
}

namespace {

void check_k(const WeightedGraph& graph, std::span<const double> k) {
  if (k.size() != graph.vertex_count()) throw std::invalid_argument("k needs one entry per vertex");
  for (double x : k)
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("k must be non-negative");
}

// sqrt((a + x)(b + y)) - sqrt(ab) without cancellation, a, b > 0, x, y >= 0.
double edge_excess(double a, double x, double b, double y) {
  const double num = x * b + y * a + x * y;
  return num / (std::sqrt((a + x) * (b + y)) + std::sqrt(a * b));
}

double log_edge_factor(const WeightedGraph& graph, std::span<const double> k) {
  const auto theta = graph.theta();
  double s = 0.0;
  for (const Edge& e : graph.edges())
    s += e.weight * edge_excess(theta[e.u] * theta[e.u], k[e.u], theta[e.v] * theta[e.v], k[e.v]);
  return -s;
}

}  // namespace

double laplace_closed(const WeightedGraph& graph, std::span<const double> k) {
  check_k(graph, k);
  const auto theta = graph.theta();
  const auto eta = graph.eta();
  double log_value = log_edge_factor(graph, k);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double t2 = theta[i] * theta[i];
    const double root = std::sqrt(t2 + k[i]);
    log_value -= eta[i] * k[i] / (root + theta[i]);
    log_value += std::log(theta[i]) - std::log(root);
  }
  return std::exp(log_value);
}

double ward_xi_closed(const WeightedGraph& graph, std::span<const double> k, Vertex i0, Vertex l) {
  check_k(graph, k);
  if (i0 == l) throw std::invalid_argument("ward identity needs l != i0");
  if (i0 >= graph.vertex_count() || l >= graph.vertex_count()) throw std::invalid_argument("vertex out of range");
  if (!graph.eta_is_zero()) throw std::invalid_argument("ward identity is stated for eta == 0");
  const auto theta = graph.theta();
  double log_value = log_edge_factor(graph, k);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i != i0) log_value += std::log(theta[i]);
    if (i != l) log_value -= 0.5 * std::log(k[i] + theta[i] * theta[i]);
  }
  return std::exp(log_value);
}

double ward_ratio_closed(const WeightedGraph& graph, Vertex i0, Vertex l) {
  if (i0 >= graph.vertex_count() || l >= graph.vertex_count()) throw std::invalid_argument("vertex out of range");
  if (!graph.eta_is_zero()) throw std::invalid_argument("ward identity is stated for eta == 0");
  return graph.theta()[l] / graph.theta()[i0];
}

double xi_statistic(const GreenMatrix& g, std::span<const double> beta, std::span<const double> k, Vertex i0,
                    Vertex l) {
  double exponent = k[i0] / (2.0 * g(i0, i0));
  for (std::size_t i = 0; i < beta.size(); ++i) exponent -= k[i] * beta[i];
  return g(i0, l) / g(i0, i0) * std::exp(exponent);
}

double marginal_variance(const WeightedGraph& graph, Vertex i) {
  if (!graph.eta_is_zero()) throw std::invalid_argument("marginal variance implemented for eta == 0");
  const auto theta = graph.theta();
  const double t = theta[i];
  double field = 0.0;
  for (const Neighbor& nb : graph.neighbors(i)) field += nb.weight * theta[nb.vertex];
  return 1.0 / (2.0 * t * t * t * t) + field / (4.0 * t * t * t);
}

EstimateReport laplace_mc(const WeightedGraph& graph, std::span<const double> k, std::size_t n_samples,
                          std::uint64_t seed, int workers) {
  check_k(graph, k);
  if (n_samples < 100) throw std::invalid_argument("laplace_mc needs at least 100 samples");
  const std::vector<double> kv(k.begin(), k.end());
  const auto values = map_replicas<double>(n_samples, seed, workers, [&](Rng& rng, std::size_t) {
    const PotentialSample s = sample_nu(graph, rng);
    double e = 0.0;
    for (std::size_t i = 0; i < kv.size(); ++i) e += kv[i] * s.beta[i];
    return std::exp(-e);
  });
  return summarize(values, seed);
}

EstimateReport ward_xi_mc(const WeightedGraph& graph, std::span<const double> k, Vertex i0, Vertex l,
                          std::size_t n_samples, std::uint64_t seed, int workers) {
  check_k(graph, k);
  if (i0 == l) throw std::invalid_argument("ward identity needs l != i0");
  if (!graph.eta_is_zero()) throw std::invalid_argument("ward identity is stated for eta == 0");
  const std::vector<double> kv(k.begin(), k.end());
  const auto values = map_replicas<double>(n_samples, seed, workers, [&](Rng& rng, std::size_t) {
    const PotentialSample s = sample_nu(graph, rng);
    const GreenMatrix g = green(assemble_h(graph, s.beta));
    return xi_statistic(g, s.beta, kv, i0, l);
  });
  return summarize(values, seed);
}

EstimateReport ward_ratio_mc(const WeightedGraph& graph, Vertex i0, Vertex l, std::size_t n_samples,
                             std::uint64_t seed, int workers) {
  if (!graph.eta_is_zero()) throw std::invalid_argument("ward identity is stated for eta == 0");
  const auto values = map_replicas<double>(n_samples, seed, workers, [&](Rng& rng, std::size_t) {
    const PotentialSample s = sample_nu(graph, rng);
    const GreenMatrix g = green(assemble_h(graph, s.beta));
    return g(i0, l) / g(i0, i0);
  });
  return summarize(values, seed);
}

}  // namespace vrjp
