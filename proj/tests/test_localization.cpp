#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"
#include "vrjp/localization.hpp"
#include "vrjp/potential.hpp"
#include "vrjp/stats.hpp"

using namespace vrjp;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Least-squares slope of log erf(theta sqrt(x/2)) on the log grid used by tau_regularity.
double erf_slope(double theta, int points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < points; ++k) {
    const double lx = std::log(1e-6) + (std::log(1e-1) - std::log(1e-6)) * k / (points - 1);
    const double ly = std::log(std::erf(theta * std::sqrt(std::exp(lx) / 2.0)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

}  // namespace

TEST_CASE("one-site spectrum") {
  const auto g = WeightedGraph::from_edges(1, {}, {1.0});
  const auto h = assemble_h(g, std::vector<double>{1.0});
  const auto r = spectrum(h, g);
  CHECK(r.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(r.ipr[0] == doctest::Approx(1.0));
}

TEST_CASE("free cycle eigenvectors are delocalized") {
  const auto g = build_cycle(10, 1.0, 1.0);
  const auto h = assemble_h(g, std::vector<double>(10, 1.0));
  const auto r = spectrum(h, g);
  for (double ipr : r.ipr) CHECK(ipr < 0.35);
  CHECK(r.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eigen_residual(h, r) < 1e-8);
}

TEST_CASE("non-symmetric or mismatched input is rejected") {
  const auto g = build_path(2, 1.0, 1.0);
  SchrodingerMatrix h;
  h.values = Eigen::MatrixXd{{2.0, -1.0}, {-0.5, 2.0}};
  CHECK_THROWS_AS(spectrum(h, g), std::invalid_argument);
  CHECK_THROWS_AS(spectrum(assemble_h(build_path(3, 1.0, 1.0), std::vector<double>(3, 1.0)), g), std::invalid_argument);
}

TEST_CASE("sampled operators: positive spectrum, small residuals") {
  const auto g = wire_box(build_box(BoxSpec{2, 2, {}, false}, 0.5, 1.0), 1.0);
  Rng rng(1);
  for (int r = 0; r < 20; ++r) {
    const auto h = assemble_h(g, sample_nu(g, rng).beta);
    const auto s = spectrum(h, g);
    CHECK(s.eigenvalues.minCoeff() > 0.0);
    CHECK(eigen_residual(h, s) < 1e-8);
    CHECK(reconstruction_error(h, s) < 1e-8);
    CHECK(orthonormality_error(s) < 1e-8);
    for (std::size_t k = 1; k < static_cast<std::size_t>(s.eigenvalues.size()); ++k)
      CHECK(s.eigenvalues(k) >= s.eigenvalues(k - 1));
  }
}

TEST_CASE("unit eigenvectors have no decay fit") {
  const auto g = build_path(5, 1.0, 1.0);
  SchrodingerMatrix h;
  h.values = Eigen::MatrixXd::Zero(5, 5);
  h.values.diagonal() << 1, 2, 3, 4, 5;
  const auto s = spectrum(h, g);
  for (double l : s.localization_length) CHECK(l == std::numeric_limits<double>::infinity());
  for (double ipr : s.ipr) CHECK(ipr == doctest::Approx(1.0));
}

TEST_CASE("disorder contrast on a 100-site chain") {
  const auto g_small = build_path(100, 1.0, 0.1);
  const auto g_large = build_path(100, 1.0, 10.0);
  std::vector<double> ipr_small, ipr_large, len_small, len_large;
  Rng rng(2);
  for (int r = 0; r < 200; ++r) {
    for (int which = 0; which < 2; ++which) {
      const auto& g = which == 0 ? g_small : g_large;
      const auto h = assemble_h(g, sample_nu(g, rng).beta);
      const auto s = spectrum(h, g);
      auto& ipr = which == 0 ? ipr_small : ipr_large;
      auto& len = which == 0 ? len_small : len_large;
      ipr.push_back(median(s.ipr));
      len.push_back(median(s.localization_length));
    }
  }
  CHECK(median(ipr_small) > median(ipr_large));
  CHECK(median(len_small) < median(len_large));
}

TEST_CASE("D0") {
  const auto one = WeightedGraph::from_edges(1, {}, {1.0});
  CHECK(d0(one, green(assemble_h(one, std::vector<double>{1.0})), 0) == 0.0);
  const auto two = build_path(2, 1.0, 1.0);
  const auto g2 = green(assemble_h(two, std::vector<double>{1.0, 1.0}));
  CHECK(d0(two, g2, 0) == doctest::Approx(0.5).epsilon(1e-15));

  const auto box = wire_box(build_box(BoxSpec{2, 1, {}, false}, 1.0, 1.0), 1.0);
  Rng rng(3);
  for (int r = 0; r < 100; ++r) {
    const auto beta = sample_nu(box, rng).beta;
    const auto g = green(assemble_h(box, beta));
    const double d = d0(box, g, 4);
    CHECK(d > 0.0);
    // With unit weights, 2 beta_0 - D0 = 1 / G(0,0).
    CHECK(std::abs((2.0 * beta[4] - d) * g(4, 4) - 1.0) <= 1e-10);
  }
}

TEST_CASE("single-site density") {
  const SingleSiteDensity p{1.3, 0.7};
  CHECK(single_site_density(p, 0.5) == 0.0);
  CHECK(single_site_density(p, 0.7) == 0.0);
  CHECK(single_site_density(p, 1.7) ==
        doctest::Approx(1.3 / std::sqrt(2 * 3.14159265358979323846) * std::exp(-1.69 / 2.0)).epsilon(1e-14));
  for (double theta : {0.1, 1.0, 10.0})
    CHECK(std::abs(single_site_mass(SingleSiteDensity{theta, 2.0}, std::numeric_limits<double>::infinity()) - 1.0) <=
          1e-8);
  CHECK(single_site_mass(p, 0.3) == doctest::Approx(std::erf(1.3 * std::sqrt(0.15))).epsilon(1e-10));
}

TEST_CASE("single-site law of 2 beta_0 - D0 on sampled potentials") {
  const auto box = wire_box(build_box(BoxSpec{2, 1, {}, false}, 1.0, 1.0), 1.0);
  const SingleSiteDensity p{1.0, 0.0};
  const std::vector<double> edges{0.0, 0.01, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0};
  std::vector<double> prob;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    prob.push_back(single_site_mass(p, edges[k + 1]) - single_site_mass(p, edges[k]));
  prob.push_back(1.0 - single_site_mass(p, edges.back()));
  std::vector<std::size_t> counts(prob.size(), 0);
  Rng rng(4);
  for (int r = 0; r < 20000; ++r) {
    const auto beta = sample_nu(box, rng).beta;
    const auto g = green(assemble_h(box, beta));
    const double v = 2.0 * beta[4] - d0(box, g, 4);
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
  }
  CHECK(chi_square_gof_pvalue(counts, prob) > 0.01);
}

TEST_CASE("edge exponent of the single-site law") {
  const auto fit1 = tau_regularity(SingleSiteDensity{1.0, 0.0});
  CHECK(std::abs(fit1.exponent - 0.5) <= 0.02);
  CHECK(fit1.x.size() == 41);
  CHECK(tau_regularity(SingleSiteDensity{1.0, 3.0}).exponent == fit1.exponent);
  CHECK(std::abs(tau_regularity(SingleSiteDensity{0.1, 0.0}).exponent - 0.5) <= 0.02);
  for (double theta : {0.1, 1.0, 10.0})
    CHECK(tau_regularity(SingleSiteDensity{theta, 0.0}).exponent == doctest::Approx(erf_slope(theta, 41)).epsilon(1e-6));
  // Large theta saturates the CDF inside the grid.
  CHECK(tau_regularity(SingleSiteDensity{10.0, 0.0}).exponent < 0.48);
}
