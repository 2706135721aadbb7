#include "doctest.h"

#include <algorithm>
#include <limits>
#include <memory>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"
#include "vrjp/potential.hpp"
#include "vrjp/replicas.hpp"
#include "vrjp/stats.hpp"

using namespace vrjp;

namespace {

const double pi = 3.14159265358979323846;

WeightedGraph single(double theta = 1.0) { return WeightedGraph::from_edges(1, {}, {theta}); }

WeightedGraph two(double w, double t1, double t2) { return WeightedGraph::from_edges(2, {{0, 1, w}}, {t1, t2}); }

// CDF of Gamma(1/2, rate r).
double gamma_half_cdf(double x, double rate) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(rate * x)); }

bool agree(const EstimateReport& a, const EstimateReport& b, double k = 4.0) {
  return std::abs(a.estimate - b.estimate) <= k * std::hypot(a.std_error, b.std_error);
}

}  // namespace

TEST_CASE("density on a single vertex") {
  const auto g = single();
  CHECK(density_nu(g, std::vector<double>{0.5}) == doctest::Approx(std::sqrt(2.0 / pi) * std::exp(-0.5)).epsilon(1e-14));
  CHECK(density_nu(g, std::vector<double>{0.5}) == doctest::Approx(0.4839).epsilon(1e-4));
  CHECK(density_nu(g, std::vector<double>{-0.1}) == 0.0);
  CHECK(density_nu(g, std::vector<double>{0.0}) == 0.0);
  CHECK(log_density_nu(g, std::vector<double>{-0.1}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("density integrates to one on one vertex") {
  const auto g = single();
  boost::math::quadrature::exp_sinh<double> integrator;
  // beta = u^2 removes the endpoint singularity.
  const double mass = integrator.integrate(
      [&](double u) { return 2.0 * u * density_nu(g, std::vector<double>{u * u}); }, 0.0,
      std::numeric_limits<double>::infinity(), 1e-12);
  CHECK(std::abs(mass - 1.0) <= 1e-8);
}

TEST_CASE("density integrates to one on two vertices over [0,50]^2") {
  const auto g = two(1.0, 1.0, 1.0);
  using boost::math::quadrature::gauss_kronrod;
  // beta_2 = (1 + t^2) / (4 beta_1) maps the region det H > 0 onto t > 0.
  const auto inner = [&](double x) {
    const double tmax2 = 200.0 * x - 1.0;
    if (tmax2 <= 0.0) return 0.0;
    return gauss_kronrod<double, 61>::integrate(
        [&](double t) { return density_nu(g, std::vector<double>{x, (1.0 + t * t) / (4.0 * x)}) * t / (2.0 * x); },
        0.0, std::sqrt(tmax2), 15, 1e-12);
  };
  const double mass = gauss_kronrod<double, 61>::integrate(inner, 0.005, 50.0, 15, 1e-11);
  CHECK(std::abs(mass - 1.0) <= 1e-6);
}

TEST_CASE("GIG density is normalized, with the constant of the conditional law") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (const GigParams p : {GigParams{2.0, 0.0}, GigParams{2.0, 2.0}, GigParams{0.7, 3.1}}) {
    const double mass =
        integrator.integrate([&](double x) { return gig_density(p, x); }, 0.0, std::numeric_limits<double>::infinity());
    CHECK(std::abs(mass - 1.0) <= 1e-8);
  }
  // theta / sqrt(pi) exp(-theta^2 g - e^2 / (4 g) + theta e) g^{-1/2}
  const double theta = 1.3, e = 0.7;
  const double mass = integrator.integrate(
      [&](double x) {
        return theta / std::sqrt(pi) * std::exp(-theta * theta * x - e * e / (4.0 * x) + theta * e) / std::sqrt(x);
      },
      0.0, std::numeric_limits<double>::infinity());
  CHECK(std::abs(mass - 1.0) <= 1e-8);
  CHECK(gig_density(GigParams{2.0 * theta * theta, e * e / 2.0}, 0.4) ==
        doctest::Approx(theta / std::sqrt(pi) * std::exp(-theta * theta * 0.4 - e * e / 1.6 + theta * e) /
                        std::sqrt(0.4))
            .epsilon(1e-13));
}

TEST_CASE("GIG sampler") {
  CHECK_THROWS_AS(sample_gig(GigParams{0.0, 1.0}, *std::make_unique<Rng>(1)), std::invalid_argument);
  CHECK_THROWS_AS(sample_gig(GigParams{1.0, -1.0}, *std::make_unique<Rng>(1)), std::invalid_argument);

  Rng rng(17);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_gig(GigParams{2.0, 0.0}, rng);
  CHECK(summarize(xs, 17).within(0.5, 4.0));
}

TEST_CASE("GIG sampler against the quadrature-normalized density (50 bins)") {
  const auto f = [](double x) { return std::exp(-x - 1.0 / x) / std::sqrt(x); };  // a = 2, b = 2
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double hi = 6.0;
  const int bins = 50;
  std::vector<double> prob(bins);
  for (int k = 0; k < bins - 1; ++k) prob[k] = ts.integrate(f, hi * k / (bins - 1), hi * (k + 1) / (bins - 1));
  prob[bins - 1] = es.integrate(f, hi, std::numeric_limits<double>::infinity());
  const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
  for (auto& p : prob) p /= total;

  Rng rng(23);
  std::vector<std::size_t> counts(bins, 0);
  for (int r = 0; r < 100000; ++r) {
    const double x = sample_gig(GigParams{2.0, 2.0}, rng);
    const int k = std::min(bins - 1, static_cast<int>(x / hi * (bins - 1)));
    ++counts[k];
  }
  CHECK(chi_square_gof_pvalue(counts, prob) > 0.01);
}

TEST_CASE("Laplace transform of 1/(2 gamma)") {
  for (double theta : {0.5, 1.0, 2.0}) {
    Rng rng(31);
    const double k = 0.8;
    std::vector<double> v(100000);
    for (auto& x : v) {
      const double g = sample_gig(GigParams{2.0 * theta * theta, 0.0}, rng);
      x = std::exp(-0.5 * k * k / (2.0 * g));
    }
    CHECK(summarize(v, 31).within(std::exp(-k * theta), 4.0));
  }
}

TEST_CASE("sampler on a single vertex is Gamma(1/2, 1)") {
  const auto g = single();
  std::vector<double> beta;
  Rng rng(5);
  for (int r = 0; r < 20000; ++r) beta.push_back(sample_nu(g, rng).beta[0]);
  CHECK(summarize(beta, 5).within(0.5, 4.0));
  CHECK(ks_one_sample(beta, [](double x) { return gamma_half_cdf(x, 1.0); }).p_value > 0.01);
}

TEST_CASE("sampler rejects a bad elimination order") {
  const auto g = build_path(3, 1.0, 1.0);
  CHECK_THROWS_AS(sample_nu(g, 1, std::vector<Vertex>{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(sample_nu(g, 1, std::vector<Vertex>{0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(sample_nu(g, 1, std::vector<Vertex>{0, 1, 3}), std::invalid_argument);
}

TEST_CASE("sampler output is supported on H > 0 and passes the per-step identity") {
  const auto g = wire_box(build_box(BoxSpec{2, 1, {}, false}, 1.0, 1.0), 1.0);
  SamplerOptions opt;
  opt.verify_each_step = true;
  Rng rng(2);
  for (int r = 0; r < 200; ++r) {
    const auto s = sample_nu(g, rng, {}, opt);
    CHECK(std::isfinite(log_density_nu(g, s.beta)));
  }
  const auto with_field = build_box(BoxSpec{2, 1, {}, false}, 1.0, 1.0).with_eta({2, 1, 2, 1, 0, 1, 2, 1, 2});
  for (int r = 0; r < 200; ++r) CHECK_NOTHROW(sample_nu(with_field, rng, {}, opt));
}

TEST_CASE("sampler is deterministic for a seed") {
  const auto g = build_path(5, 0.8, 1.0);
  CHECK(sample_nu(g, 99).beta == sample_nu(g, 99).beta);
  CHECK(sample_nu(g, 99).beta != sample_nu(g, 100).beta);
}

TEST_CASE("two-vertex sampler against a rejection oracle on density_nu") {
  const auto g = two(1.0, 1.0, 1.0);
  // Coordinates x = beta_1, t = sqrt(det H) on the window (0,40] x (0,20].
  const auto target = [&](double x, double t) {
    return density_nu(g, std::vector<double>{x, (1.0 + t * t) / (4.0 * x)}) * t / (2.0 * x);
  };
  double bound = 0.0;
  for (int i = 1; i <= 800; ++i)
    for (int j = 1; j <= 100; ++j) bound = std::max(bound, target(40.0 * i / 800.0 * 0.05, 20.0 * j / 100.0 * 0.05));
  for (int i = 1; i <= 400; ++i)
    for (int j = 1; j <= 200; ++j) bound = std::max(bound, target(40.0 * i / 400.0, 20.0 * j / 200.0));
  bound *= 1.2;

  const std::size_t n = 20000;
  Rng rng(77);
  std::vector<double> oracle1, oracle2;
  std::size_t violations = 0;
  while (oracle1.size() < n) {
    const double x = 40.0 * rng.uniform();
    const double t = 20.0 * rng.uniform();
    const double f = target(x, t);
    if (f > bound) ++violations;
    if (rng.uniform() * bound < f) {
      oracle1.push_back(x);
      oracle2.push_back((1.0 + t * t) / (4.0 * x));
    }
  }
  CHECK(violations == 0);
  std::vector<double> s1, s2;
  Rng srng(78);
  for (std::size_t r = 0; r < n; ++r) {
    const auto b = sample_nu(g, srng).beta;
    s1.push_back(b[0]);
    s2.push_back(b[1]);
  }
  CHECK(ks_two_sample(s1, oracle1).p_value > 0.01);
  CHECK(ks_two_sample(s2, oracle2).p_value > 0.01);
}

TEST_CASE("Laplace closed form") {
  CHECK(laplace_closed(single(), std::vector<double>{3.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(laplace_closed(build_path(4, 1.0, 1.0), std::vector<double>(4, 0.0)) == 1.0);
  CHECK(laplace_closed(two(1.0, 1.0, 1.0), std::vector<double>{3.0, 0.0}) ==
        doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(laplace_closed(single(), std::vector<double>{-1.0}), std::invalid_argument);
}

TEST_CASE("Laplace Monte Carlo") {
  CHECK(laplace_mc(single(), std::vector<double>{3.0}, 100000, 1).within(0.5, 4.0));
  const auto zero = laplace_mc(build_path(3, 1.0, 1.0), std::vector<double>(3, 0.0), 1000, 2);
  CHECK(zero.estimate == 1.0);
  CHECK(zero.std_error == 0.0);
  const auto path = build_path(3, 1.0, 1.0);
  const std::vector<double> k(3, 0.5);
  CHECK(laplace_mc(path, k, 100000, 3).within(laplace_closed(path, k), 4.0));
  CHECK_THROWS_AS(laplace_mc(single(), std::vector<double>{1.0}, 99, 1), std::invalid_argument);
}

TEST_CASE("Laplace closed form with an exterior field") {
  const auto g = build_path(3, 0.7, 1.0).with_eta({0.7, 0.0, 0.7});
  const std::vector<double> k{0.3, 1.1, 0.2};
  CHECK(laplace_mc(g, k, 100000, 13).within(laplace_closed(g, k), 4.0));
}

TEST_CASE("Monte Carlo is independent of the worker count") {
  const auto g = build_path(4, 1.0, 1.0);
  const std::vector<double> k{0.1, 0.2, 0.3, 0.4};
  const auto a = laplace_mc(g, k, 3000, 42, 1);
  const auto b = laplace_mc(g, k, 3000, 42, 3);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("Ward identities, closed form") {
  const auto p = build_cycle(4, 0.6, 1.7);
  CHECK(ward_xi_closed(p, std::vector<double>(4, 0.0), 0, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ward_xi_closed(two(1.0, 1.0, 1.0), std::vector<double>{1.0, 0.0}, 0, 1) ==
        doctest::Approx(std::exp(-(std::sqrt(2.0) - 1.0)) / std::sqrt(2.0)).epsilon(1e-15));
  for (const auto& th : {std::pair{1.0, 2.0}, std::pair{0.3, 1.9}}) {
    const auto g = two(1.0, th.first, th.second);
    CHECK(ward_xi_closed(g, std::vector<double>{0.0, 0.0}, 0, 1) == doctest::Approx(th.second / th.first).epsilon(1e-14));
    CHECK(ward_ratio_closed(g, 0, 1) == th.second / th.first);
  }
  CHECK_THROWS_AS(ward_xi_closed(p, std::vector<double>(4, 0.0), 1, 1), std::invalid_argument);
}

TEST_CASE("Ward identities, Monte Carlo") {
  const auto path = build_path(3, 1.0, 1.0);
  const std::vector<double> k(3, 0.5);
  CHECK(ward_xi_mc(path, k, 0, 2, 100000, 4).within(ward_xi_closed(path, k, 0, 2), 4.0));
  CHECK(ward_ratio_mc(path, 0, 2, 100000, 5).within(1.0, 4.0));
  CHECK(ward_ratio_mc(two(1.0, 1.0, 2.0), 0, 1, 100000, 6).within(2.0, 4.0));
}

TEST_CASE("elimination order does not change the law") {
  const auto g = WeightedGraph::from_edges(4, {{0, 1, 0.8}, {1, 2, 1.2}, {2, 3, 0.5}, {0, 3, 0.9}}, {1.0, 0.7, 1.4, 1.1});
  const std::vector<Vertex> order_a{0, 1, 2, 3};
  const std::vector<Vertex> order_b{2, 0, 3, 1};
  const std::size_t n = 100000;
  const auto draw = [&](const std::vector<Vertex>& order, std::uint64_t seed) {
    return map_replicas<std::vector<double>>(n, seed, 0, [&](Rng& rng, std::size_t) { return sample_nu(g, rng, order).beta; });
  };
  const auto a = draw(order_a, 1);
  const auto b = draw(order_b, 2);
  Rng pick(3);
  for (int point = 0; point < 5; ++point) {
    std::vector<double> k(4);
    for (auto& x : k) x = 2.0 * pick.uniform();
    const auto stat = [&](const std::vector<std::vector<double>>& samples) {
      std::vector<double> v;
      for (const auto& beta : samples) v.push_back(std::exp(-std::inner_product(k.begin(), k.end(), beta.begin(), 0.0)));
      return summarize(v, 0);
    };
    const auto ea = stat(a), eb = stat(b);
    CHECK(agree(ea, eb));
    CHECK(ea.within(laplace_closed(g, k), 4.0));
  }
}

TEST_CASE("potentials at non-adjacent vertices are uncorrelated") {
  const auto g = build_path(3, 1.0, 1.0);
  const auto samples =
      map_replicas<std::vector<double>>(100000, 8, 0, [&](Rng& rng, std::size_t) { return sample_nu(g, rng).beta; });
  double m0 = 0.0, m2 = 0.0;
  for (const auto& b : samples) {
    m0 += b[0];
    m2 += b[2];
  }
  m0 /= samples.size();
  m2 /= samples.size();
  std::vector<double> prod, adj;
  for (const auto& b : samples) prod.push_back((b[0] - m0) * (b[2] - m2));
  CHECK(summarize(prod, 8).within(0.0, 4.0));
}

TEST_CASE("scaling to unit theta") {
  const auto g = WeightedGraph::from_edges(3, {{0, 1, 0.6}, {1, 2, 1.3}}, {0.5, 2.0, 1.25});
  const auto s = scale_to_unit_theta(g);
  const auto theta = g.theta();
  Rng pick(4);
  for (int point = 0; point < 5; ++point) {
    std::vector<double> k(3), kt(3);
    for (int i = 0; i < 3; ++i) {
      k[i] = 3.0 * pick.uniform();
      kt[i] = k[i] * theta[i] * theta[i];
    }
    CHECK(std::abs(laplace_closed(g, kt) / laplace_closed(s, k) - 1.0) <= 1e-12);

    std::vector<double> v;
    Rng rng(100 + point);
    for (int r = 0; r < 50000; ++r) {
      const auto beta = sample_nu(g, rng).beta;
      double e = 0.0;
      for (int i = 0; i < 3; ++i) e += kt[i] * beta[i];
      v.push_back(std::exp(-e));
    }
    CHECK(agree(summarize(v, 0), laplace_mc(s, k, 50000, 200 + point)));
  }
}

TEST_CASE("1/(2 G(i0,i0)) is Gamma(1/2, theta_i0^2)") {
  const auto g = WeightedGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 0.4}}, {1.0, 2.0, 0.5});
  for (Vertex i0 : {Vertex{0}, Vertex{1}}) {
    Rng rng(60 + i0);
    std::vector<double> v;
    for (int r = 0; r < 10000; ++r) {
      const auto beta = sample_nu(g, rng).beta;
      v.push_back(1.0 / (2.0 * green(assemble_h(g, beta))(i0, i0)));
    }
    const double rate = g.theta()[i0] * g.theta()[i0];
    CHECK(ks_one_sample(v, [&](double x) { return gamma_half_cdf(x, rate); }).p_value > 0.01);
  }
}

TEST_CASE("marginal variance agrees with the curvature of the Laplace transform") {
  const auto g = WeightedGraph::from_edges(3, {{0, 1, 0.6}, {1, 2, 1.3}, {0, 2, 0.2}}, {0.5, 2.0, 1.25});
  for (Vertex i = 0; i < 3; ++i) {
    const auto logl = [&](double h) {
      std::vector<double> k(3, 0.0);
      k[i] = h;
      return std::log(laplace_closed(g, k));
    };
    const double h = 1e-3;
    const double second = (2.0 * logl(0) - 5.0 * logl(h) + 4.0 * logl(2 * h) - logl(3 * h)) / (h * h);
    CHECK(marginal_variance(g, i) == doctest::Approx(second).epsilon(1e-4));
  }
  // Bulk of a lattice at theta = 1: (1 + d W) / 2.
  const auto box = wire_box(build_box(BoxSpec{2, 2, {}, false}, 0.3, 1.0), 1.0);
  CHECK(marginal_variance(box, 12) == doctest::Approx((1.0 + 2.0 * 0.3) / 2.0).epsilon(1e-15));
}
