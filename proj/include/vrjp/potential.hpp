#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"
#include "vrjp/rng.hpp"
#include "vrjp/stats.hpp"

namespace vrjp {

/// Generalized inverse Gaussian law with index 1/2:
///   density  proportional to  x^{-1/2} exp(-(a x + b / x) / 2),  x > 0.
/// With a = 2 theta^2 and b = eta_check^2 / 2 this is the conditional law of
/// gamma = beta_{i0} - <W, G_hat W> / 2. For b = 0 it is Gamma(1/2, rate a/2).
struct GigParams {
  double a = 1.0;
  double b = 0.0;
};

/// Normalized density sqrt(a / 2pi) e^{sqrt(ab)} x^{-1/2} e^{-(a x + b/x)/2}.
double gig_density(const GigParams& p, double x);

/// Exact draw. Uses the reciprocal of an inverse-Gaussian(mu = sqrt(a/b),
/// shape a) variate (Michael-Schucany-Haas), written so that b -> 0
/// continuously becomes the Gamma(1/2, a/2) draw. Throws on a <= 0 or b < 0.
double sample_gig(const GigParams& p, Rng& rng);

struct PotentialSample {
  std::vector<double> beta;
  std::vector<Vertex> elimination_order;
  std::uint64_t seed = 0;
};

/// log of the nu^{W,theta,eta} density; -infinity where H_beta is not
/// positive definite.
double log_density_nu(const WeightedGraph& graph, std::span<const double> beta);
double density_nu(const WeightedGraph& graph, std::span<const double> beta);

/// Identity permutation: the elimination sweep then runs through the lattice
/// sites in reverse row-major order, starting with the boundary vertex.
std::vector<Vertex> default_elimination_order(const WeightedGraph& graph);

struct SamplerOptions {
  /// Check H_S G_S = I (max-abs 1e-10) after every incremental update.
  bool verify_each_step = false;
};

/// Exact sequential sampler of nu^{W,theta,eta}. With order (v_1..v_N),
/// beta_{v_k} is drawn from its conditional law given beta_{v_1..v_{k-1}}
/// under the marginal of the first k vertices; (H_S)^{-1} is carried along by
/// Schur-complement updates. An empty `order` means the default order.
PotentialSample sample_nu(const WeightedGraph& graph, std::uint64_t seed,
                          std::span<const Vertex> order = {}, const SamplerOptions& options = {});
PotentialSample sample_nu(const WeightedGraph& graph, Rng& rng, std::span<const Vertex> order = {},
                          const SamplerOptions& options = {});

/// Closed-form Laplace transform <exp(-sum k_i beta_i)>.
double laplace_closed(const WeightedGraph& graph, std::span<const double> k);

/// Closed form of <Xi(k, W, beta)> for eta = 0, l != i0.
double ward_xi_closed(const WeightedGraph& graph, std::span<const double> k, Vertex i0, Vertex l);

/// <G(i0,l) / G(i0,i0)> = theta_l / theta_i0 for eta = 0.
double ward_ratio_closed(const WeightedGraph& graph, Vertex i0, Vertex l);

/// Per-sample statistic (G(i0,l)/G(i0,i0)) exp(k_i0 / (2 G(i0,i0)) - sum k_i beta_i).
double xi_statistic(const GreenMatrix& g, std::span<const double> beta, std::span<const double> k,
                    Vertex i0, Vertex l);

/// Exact marginal variance of beta_i from the Laplace transform:
/// 1 / (2 theta_i^4) + sum_j W_ij theta_j / (4 theta_i^3)   (eta = 0).
double marginal_variance(const WeightedGraph& graph, Vertex i);

/// Monte-Carlo counterparts. Replica r uses derive_seed(seed, r); results
/// do not depend on `workers`.
EstimateReport laplace_mc(const WeightedGraph& graph, std::span<const double> k, std::size_t n_samples,
                          std::uint64_t seed, int workers = 0);
EstimateReport ward_xi_mc(const WeightedGraph& graph, std::span<const double> k, Vertex i0, Vertex l,
                          std::size_t n_samples, std::uint64_t seed, int workers = 0);
EstimateReport ward_ratio_mc(const WeightedGraph& graph, Vertex i0, Vertex l, std::size_t n_samples,
                             std::uint64_t seed, int workers = 0);

}  // namespace vrjp
