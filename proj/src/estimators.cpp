#include "vrjp/estimators.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "vrjp/green.hpp"
#include "vrjp/potential.hpp"
#include "vrjp/process.hpp"
#include "vrjp/replicas.hpp"

namespace vrjp {

WeightedGraph draw_wired_box(const BoxSpec& spec, const WeightLaw& law, double theta, Rng& rng) {
  if (!(law.value > 0.0)) throw std::invalid_argument("weight law parameter must be positive");
  BoxSpec open = spec;
  open.wired = false;
  if (law.kind == WeightLaw::Kind::deterministic) return wire_box(build_box(open, law.value, theta), theta);
  const WeightedGraph box = build_box(open, 1.0, theta);
  const std::vector<double> inner_shape(box.edges().size(), law.value);
  const std::vector<double> cut_shape(cut_edge_count(open), law.value);
  const std::vector<double> inner = sample_gamma_weights(inner_shape, rng);
  const std::vector<double> cut = sample_gamma_weights(cut_shape, rng);
  return wire_box(box.with_edge_weights(inner), theta, cut);
}

std::vector<std::vector<int>> axis_targets(const BoxSpec& spec) {
  std::vector<std::vector<int>> out;
  for (int r = 0; r <= spec.half_side; ++r) {
    std::vector<int> x(static_cast<std::size_t>(spec.dimension), 0);
    x[0] = r;
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<TargetEstimate> fractional_moment(const FractionalMomentRequest& req) {
  if (!req.box.wired) throw std::invalid_argument("fractional moments are taken on a wired box");
  if (!(req.exponent > 0.0 && req.exponent < 0.5)) throw std::invalid_argument("exponent must lie in (0, 1/2)");
  if (!(req.theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (req.targets.empty()) throw std::invalid_argument("no targets");
  if (req.n_samples < 2) throw std::invalid_argument("need at least 2 samples");

  const Vertex origin = box_center(req.box);
  std::vector<Vertex> index;
  std::vector<TargetEstimate> out;
  for (const auto& x : req.targets) {
    if (x.size() != static_cast<std::size_t>(req.box.dimension)) throw std::invalid_argument("target has wrong dimension");
    for (int c : x)
      if (std::abs(c) > req.box.half_side) throw std::invalid_argument("target outside the box");
    index.push_back(lattice_index(req.box, x));
    TargetEstimate t;
    t.offset = x;
    for (int c : x) t.distance += std::abs(c);
    out.push_back(std::move(t));
  }

  // Deterministic weights: one graph shared by every replica.
  std::optional<WeightedGraph> fixed;
  if (req.law.kind == WeightLaw::Kind::deterministic) {
    Rng unused(0);
    fixed = draw_wired_box(req.box, req.law, req.theta, unused);
  }

  const auto rows = map_replicas<std::vector<double>>(req.n_samples, req.seed, req.workers, [&](Rng& rng, std::size_t) {
    std::optional<WeightedGraph> drawn;
    if (!fixed) drawn = draw_wired_box(req.box, req.law, req.theta, rng);
    const WeightedGraph& graph = fixed ? *fixed : *drawn;
    const PotentialSample s = sample_nu(graph, rng);
    const GreenMatrix g = green(assemble_h(graph, s.beta));
    std::vector<double> v(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) v[k] = std::pow(g(origin, index[k]), req.exponent);
    return v;
  });

  std::vector<double> column(req.n_samples);
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][k];
    out[k].report = summarize(column, req.seed);
  }
  return out;
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& pts) {
  DecayFit fit;
  std::vector<double> xs;
  for (const auto& [x, e] : pts) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("decay fit needs positive estimates");
    fit.points.push_back({x, std::log(e)});
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  }
  if (xs.size() < 3) throw std::invalid_argument("decay fit needs three distinct distances");
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : fit.points) {
    mx += p.distance;
    my += p.log_estimate;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : fit.points) {
    sxx += (p.distance - mx) * (p.distance - mx);
    sxy += (p.distance - mx) * (p.log_estimate - my);
    syy += (p.log_estimate - my) * (p.log_estimate - my);
  }
  const double slope = sxy / sxx;
  fit.kappa = slope == 0.0 ? 0.0 : -slope;
  if (syy <= 1e-28 * std::max(1.0, my * my)) {
    fit.r_squared = 1.0;
  } else {
    double ssr = 0.0;
    for (const auto& p : fit.points) {
      const double r = p.log_estimate - (my + slope * (p.distance - mx));
      ssr += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  }
  return fit;
}

DecayFit fit_decay(const std::vector<TargetEstimate>& estimates) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& t : estimates) pts.emplace_back(static_cast<double>(t.distance), t.report.estimate);
  return fit_decay(pts);
}

double moment_constant(double theta, double s) {
  if (!(s > 0.0 && s < 0.5)) throw std::invalid_argument("moment exponent must lie in (0, 1/2)");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  return std::exp(-s * std::numbers::ln2 + boost::math::lgamma(0.5 - s) - boost::math::lgamma(0.5) +
                  2.0 * s * std::log(theta));
}

double printed_lemma_constant(double theta) {
  return boost::math::tgamma(0.25) / (std::cbrt(2.0) * std::sqrt(std::numbers::pi)) * std::sqrt(theta);
}

Thresholds threshold_w(int d, double theta) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  Thresholds t;
  t.wprime_bar = 1.0 / (2.0 * d * moment_constant(theta, 0.25));
  t.w_bar_4 = std::pow(t.wprime_bar, 4);
  return t;
}

double printed_threshold_stated(int d) { return 0.24 / d; }

double printed_threshold_formula(int d) {
  return std::sqrt(std::numbers::pi) / (boost::math::tgamma(0.25) * std::pow(2.0, 5.0 / 3.0) * d);
}

double threshold_errw(int d) {
  const double target = std::log(threshold_w(d, 1.0).wprime_bar);
  // log Gamma(a + 1/4) - log Gamma(a) increases from -inf to +inf.
  auto f = [&](double a) { return boost::math::lgamma(a + 0.25) - boost::math::lgamma(a) - target; };
  double lo = 1e-12, hi = 1e6;
  if (!(f(lo) < 0.0 && f(hi) > 0.0)) throw std::runtime_error("threshold root not bracketed");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

VarianceCheck variance_check(const BoxSpec& spec, double w, double theta, std::size_t n_samples, std::uint64_t seed,
                             int workers) {
  if (spec.half_side < 2) throw std::invalid_argument("variance check needs side >= 5");
  if (n_samples < 2) throw std::invalid_argument("need at least 2 samples");
  BoxSpec open = spec;
  open.wired = false;
  const WeightedGraph graph = wire_box(build_box(open, w, theta), theta);
  const Vertex c = box_center(open);
  const auto values = map_replicas<double>(n_samples, seed, workers,
                                           [&](Rng& rng, std::size_t) { return sample_nu(graph, rng).beta[c]; });
  VarianceCheck out;
  out.variance = summarize_variance(values, seed);
  out.stated = (1.0 + spec.dimension * w) / (2.0 * theta * theta);
  out.exact = marginal_variance(graph, c);
  return out;
}

}  // namespace vrjp
