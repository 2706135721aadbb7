#include "vrjp/localization.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace vrjp {

namespace {

double fit_length(const Eigen::VectorXd& psi, const std::vector<std::size_t>& dist) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  std::size_t far = 0;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    const double a = std::abs(psi(x));
    if (a <= 1e-12) continue;
    const double d = static_cast<double>(dist[static_cast<std::size_t>(x)]);
    const double y = std::log(a);
    sx += d;
    sy += y;
    sxx += d * d;
    sxy += d * y;
    far = std::max(far, dist[static_cast<std::size_t>(x)]);
    ++n;
  }
  const double inf = std::numeric_limits<double>::infinity();
  if (n < 2 || far == 0) return inf;
  const double nn = static_cast<double>(n);
  const double slope = (sxy - sx * sy / nn) / (sxx - sx * sx / nn);
  return slope < 0.0 ? -1.0 / slope : inf;
}

}  // namespace

SpectralReport spectrum(const SchrodingerMatrix& h, const WeightedGraph& graph) {
  const Eigen::MatrixXd& m = h.values;
  if (m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(graph.vertex_count()))
    throw std::invalid_argument("H does not match the graph");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw std::invalid_argument("H must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  SpectralReport r;
  r.eigenvalues = solver.eigenvalues();
  r.eigenvectors = solver.eigenvectors();

  const std::size_t n = graph.vertex_count();
  std::vector<std::vector<std::size_t>> dist(n);
  for (Eigen::Index k = 0; k < r.eigenvectors.cols(); ++k) {
    const Eigen::VectorXd psi = r.eigenvectors.col(k);
    Eigen::Index peak = 0;
    psi.cwiseAbs().maxCoeff(&peak);
    auto& dp = dist[static_cast<std::size_t>(peak)];
    if (dp.empty()) dp = hop_distances(graph, static_cast<Vertex>(peak));
    r.localization_length.push_back(fit_length(psi, dp));
    const double s2 = psi.squaredNorm();
    r.ipr.push_back(psi.array().pow(4).sum() / (s2 * s2));
  }
  return r;
}

double eigen_residual(const SchrodingerMatrix& h, const SpectralReport& r) {
  const Eigen::MatrixXd res = h.values * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal();
  return res.cwiseAbs().maxCoeff();
}

double reconstruction_error(const SchrodingerMatrix& h, const SpectralReport& r) {
  const Eigen::MatrixXd rec = r.eigenvectors * r.eigenvalues.asDiagonal() * r.eigenvectors.transpose();
  return (rec - h.values).cwiseAbs().maxCoeff();
}

double orthonormality_error(const SpectralReport& r) {
  const Eigen::Index n = r.eigenvectors.cols();
  return (r.eigenvectors.transpose() * r.eigenvectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

double d0(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0) {
  if (i0 >= graph.vertex_count()) throw std::invalid_argument("vertex out of range");
  double s = 0.0;
  for (const Neighbor& nb : graph.neighbors(i0)) s += g(i0, nb.vertex);
  return s / g(i0, i0);
}

namespace {

double offset_density(double theta, double v) {
  if (!(v > 0.0)) return 0.0;
  return theta / std::sqrt(2.0 * std::numbers::pi * v) * std::exp(-0.5 * v * theta * theta);
}

}  // namespace

double single_site_density(const SingleSiteDensity& p, double u) { return offset_density(p.theta, u - p.d0); }

double single_site_mass(const SingleSiteDensity& p, double x) {
  if (!(p.theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (!(x > 0.0)) return 0.0;
  auto f = [&](double v) { return offset_density(p.theta, v); };
  if (std::isinf(x)) {
    // Split at 1 so the edge singularity and the tail each get their own rule.
    boost::math::quadrature::tanh_sinh<double> edge;
    boost::math::quadrature::exp_sinh<double> tail;
    return edge.integrate(f, 0.0, 1.0) + tail.integrate(f, 1.0, std::numeric_limits<double>::infinity());
  }
  boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, 0.0, x);
}

RegularityFit tau_regularity(const SingleSiteDensity& p, int points) {
  if (points < 2) throw std::invalid_argument("need at least two grid points");
  RegularityFit fit;
  const double lo = std::log(1e-6), hi = std::log(1e-1);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < points; ++k) {
    const double lx = lo + (hi - lo) * k / (points - 1);
    const double x = std::exp(lx);
    const double f = single_site_mass(p, x);
    if (!(f > 0.0) || !std::isfinite(f)) throw std::runtime_error("quadrature failed in regularity fit");
    fit.x.push_back(x);
    fit.mass.push_back(f);
    const double ly = std::log(f);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points);
  fit.exponent = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  return fit;
}

}  // namespace vrjp
