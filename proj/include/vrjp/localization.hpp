#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"

namespace vrjp {

struct SpectralReport {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  /// -1 / slope of log|psi(x)| against graph distance from the peak of psi,
  /// over sites with |psi(x)| > 1e-12; +infinity when the fit does not decay.
  std::vector<double> localization_length;
  std::vector<double> ipr;  // sum psi^4 / (sum psi^2)^2
};

/// Full symmetric eigendecomposition of H with per-vector diagnostics; graph
/// distances come from `graph`. Throws std::invalid_argument on a
/// non-symmetric H or a size mismatch.
SpectralReport spectrum(const SchrodingerMatrix& h, const WeightedGraph& graph);

/// max over pairs of |H psi - lambda psi|_inf.
double eigen_residual(const SchrodingerMatrix& h, const SpectralReport& r);
/// max entry of |sum lambda psi psi^T - H|.
double reconstruction_error(const SchrodingerMatrix& h, const SpectralReport& r);
/// max entry of |Psi^T Psi - I|.
double orthonormality_error(const SpectralReport& r);

/// sum over neighbours j of i0 of G(i0,j) / G(i0,i0).
double d0(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0);

/// Single-site law with density theta / sqrt(2 pi (u - D0)) exp(-(u - D0) theta^2 / 2) on u > D0.
struct SingleSiteDensity {
  double theta = 1.0;
  double d0 = 0.0;
};

double single_site_density(const SingleSiteDensity& p, double u);

/// Mass of the density over (D0, D0 + x] by tanh-sinh quadrature in the
/// offset variable, so the result does not depend on D0. x = +infinity
/// gives the total mass.
double single_site_mass(const SingleSiteDensity& p, double x);

struct RegularityFit {
  double exponent = 0.0;  // slope of log F(x) against log x
  std::vector<double> x;
  std::vector<double> mass;
};

/// Least-squares edge exponent over `points` log-spaced x in [1e-6, 1e-1].
/// Throws std::runtime_error if a quadrature result is not positive and finite.
RegularityFit tau_regularity(const SingleSiteDensity& p, int points = 41);

}  // namespace vrjp
