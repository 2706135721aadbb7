#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vrjp/estimators.hpp"
#include "vrjp/graph.hpp"
#include "vrjp/rng.hpp"

using namespace vrjp;

namespace {

const double pi = 3.14159265358979323846;

FractionalMomentRequest request(int d, int half, double w, std::size_t n, std::uint64_t seed) {
  FractionalMomentRequest r;
  r.box = BoxSpec{d, half, {}, true};
  r.law = WeightLaw::fixed(w);
  r.n_samples = n;
  r.seed = seed;
  return r;
}

bool agree(const EstimateReport& a, const EstimateReport& b, double k) {
  return std::abs(a.estimate - b.estimate) <= k * std::hypot(a.std_error, b.std_error);
}

}  // namespace

TEST_CASE("decay fit") {
  std::vector<std::pair<double, double>> pts;
  for (int x = 0; x <= 6; ++x) pts.emplace_back(x, 3.0 * std::exp(-0.5 * x));
  const auto fit = fit_decay(pts);
  CHECK(fit.kappa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points.size() == 7);

  std::vector<std::pair<double, double>> flat{{0, 2.0}, {1, 2.0}, {2, 2.0}};
  CHECK(fit_decay(flat).kappa == 0.0);
  CHECK(fit_decay(flat).r_squared == 1.0);

  CHECK_THROWS_AS(fit_decay(std::vector<std::pair<double, double>>{{0, 1.0}, {1, 0.0}, {2, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_decay(std::vector<std::pair<double, double>>{{0, 1.0}, {1, 0.5}, {1, 0.4}}), std::invalid_argument);
}

TEST_CASE("moment constant") {
  CHECK(std::abs(moment_constant(1.0, 1e-9) - 1.0) <= 1e-8);
  CHECK(moment_constant(1.0, 0.25) == doctest::Approx(1.7202).epsilon(1e-4));
  CHECK(moment_constant(1.0, 0.25) ==
        doctest::Approx(std::pow(2.0, -0.25) * std::tgamma(0.25) / std::sqrt(pi)).epsilon(1e-14));
  for (double theta : {0.3, 2.0, 7.0})
    for (double s : {0.1, 0.25, 0.45})
      CHECK(moment_constant(theta, s) == doctest::Approx(std::pow(theta, 2 * s) * moment_constant(1.0, s)).epsilon(1e-13));
  CHECK_THROWS_AS(moment_constant(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(moment_constant(1.0, 0.0), std::invalid_argument);

  // E[(2 gamma)^{-s}] for gamma ~ Gamma(1/2, rate theta^2), by quadrature.
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double theta : {0.5, 1.0, 3.0}) {
    const double s = 0.25;
    const double q = ts.integrate(
        [&](double x) {
          return std::pow(2.0 * x, -s) * theta / std::sqrt(pi) * std::exp(-theta * theta * x) / std::sqrt(x);
        },
        0.0, std::numeric_limits<double>::infinity());
    CHECK(moment_constant(theta, s) == doctest::Approx(q).epsilon(1e-9));
  }
  CHECK(printed_lemma_constant(1.0) == doctest::Approx(std::tgamma(0.25) / (std::cbrt(2.0) * std::sqrt(pi))).epsilon(1e-14));
}

TEST_CASE("recurrence thresholds") {
  const auto t1 = threshold_w(1, 1.0);
  CHECK(t1.wprime_bar == doctest::Approx(0.2907).epsilon(1e-3));
  CHECK(t1.w_bar_4 == doctest::Approx(std::pow(t1.wprime_bar, 4)).epsilon(1e-15));
  for (int d = 2; d <= 6; ++d)
    CHECK(std::abs(threshold_w(d, 1.0).wprime_bar - t1.wprime_bar / d) <= 2e-16 * t1.wprime_bar);
  CHECK(printed_threshold_stated(3) == 0.08);
  CHECK(printed_threshold_formula(1) == doctest::Approx(0.1539).epsilon(1e-3));
  CHECK_THROWS_AS(threshold_w(0, 1.0), std::invalid_argument);
}

TEST_CASE("ERRW threshold") {
  double prev = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 5; ++d) {
    const double a = threshold_errw(d);
    CHECK(a > 0.0);
    CHECK(a < prev);
    prev = a;
    const double ratio = std::exp(std::lgamma(a + 0.25) - std::lgamma(a));
    CHECK(std::abs(ratio - threshold_w(d, 1.0).wprime_bar) <= 1e-10);
  }
  CHECK(std::abs(threshold_errw(3) - 0.02959) < 1e-4);
  CHECK(threshold_errw(3) < printed_abar_3);
}

TEST_CASE("fractional moment at the origin matches the Gamma moment") {
  auto r = request(1, 3, 0.3, 4000, 1);
  r.targets = {{0}};
  const auto out = fractional_moment(r);
  CHECK(out[0].distance == 0);
  CHECK(out[0].report.within(moment_constant(1.0, 0.25), 4.0));

  auto g = request(1, 3, 0.3, 4000, 2);
  g.law = WeightLaw::gamma_shape(0.8);
  g.theta = 1.7;
  g.targets = {{0}};
  CHECK(fractional_moment(g)[0].report.within(moment_constant(1.7, 0.25), 4.0));
}

TEST_CASE("fractional moment symmetry and decay") {
  auto r = request(2, 3, 0.05, 3000, 3);
  r.targets = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {-2, 0}, {0, 2}};
  const auto out = fractional_moment(r);
  CHECK(agree(out[2].report, out[4].report, 4.0));
  CHECK(agree(out[2].report, out[5].report, 4.0));
  for (int k = 1; k <= 3; ++k)
    CHECK(out[k].report.estimate <= out[k - 1].report.estimate + 2.0 * out[k].report.std_error);
  std::vector<TargetEstimate> axis(out.begin(), out.begin() + 4);
  const auto fit = fit_decay(axis);
  CHECK(fit.kappa > 0.0);
  CHECK(fit.r_squared > 0.9);
}

TEST_CASE("fractional moment is independent of the worker count") {
  auto r = request(2, 2, 0.1, 500, 4);
  r.targets = axis_targets(r.box);
  r.workers = 1;
  const auto a = fractional_moment(r);
  r.workers = 3;
  const auto b = fractional_moment(r);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].report.estimate == b[k].report.estimate);
    CHECK(a[k].report.std_error == b[k].report.std_error);
  }
}

TEST_CASE("fractional moment input validation") {
  auto r = request(1, 2, 0.1, 10, 5);
  r.targets = {{3}};
  CHECK_THROWS_AS(fractional_moment(r), std::invalid_argument);
  r.targets = {{0, 0}};
  CHECK_THROWS_AS(fractional_moment(r), std::invalid_argument);
  r.targets = {{1}};
  r.exponent = 0.5;
  CHECK_THROWS_AS(fractional_moment(r), std::invalid_argument);
  r.exponent = 0.25;
  r.box.wired = false;
  CHECK_THROWS_AS(fractional_moment(r), std::invalid_argument);
}

TEST_CASE("axis targets") {
  const auto t = axis_targets(BoxSpec{2, 3, {}, true});
  REQUIRE(t.size() == 4);
  CHECK(t[3] == std::vector<int>{3, 0});
}

TEST_CASE("random wired boxes") {
  Rng rng(6);
  const BoxSpec s{2, 2, {}, true};
  const auto g = draw_wired_box(s, WeightLaw::gamma_shape(1.0), 1.0, rng);
  CHECK(g.vertex_count() == 26);
  CHECK(g.boundary() == Vertex{25});
  const auto h = draw_wired_box(s, WeightLaw::gamma_shape(1.0), 1.0, rng);
  CHECK(!(g == h));
  const auto f = draw_wired_box(s, WeightLaw::fixed(0.4), 1.0, rng);
  CHECK(f.weight(0, 25) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("centre variance of a wired box") {
  const auto v = variance_check(BoxSpec{1, 2, {}, true}, 1.0, 1.0, 100000, 7);
  CHECK(v.stated == 1.0);
  CHECK(v.exact == 1.0);
  CHECK(v.variance.within(1.0, 4.0));

  const auto w = variance_check(BoxSpec{1, 2, {}, true}, 0.5, 2.0, 100000, 8);
  CHECK(w.exact == doctest::Approx(1.0 / 32.0 + 0.5 / 8.0).epsilon(1e-15));
  CHECK(w.variance.within(w.exact, 4.0));
  CHECK(!w.variance.within(w.stated, 4.0));
  CHECK_THROWS_AS(variance_check(BoxSpec{1, 1, {}, true}, 1.0, 1.0, 100, 1), std::invalid_argument);
}
