#include "vrjp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "vrjp/estimators.hpp"
#include "vrjp/green.hpp"
#include "vrjp/localization.hpp"
#include "vrjp/potential.hpp"
#include "vrjp/process.hpp"
#include "vrjp/replicas.hpp"

namespace vrjp {

namespace {

using nlohmann::json;

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(std::uint64_t x) { return std::to_string(x); }

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) { row(header); }
  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::uint64_t need_seed(const ExperimentConfig& c) {
  if (!c.seed) throw std::invalid_argument("a master seed is required (--seed)");
  return *c.seed;
}

std::size_t samples_or(const ExperimentConfig& c, std::size_t fallback) {
  return c.n_samples ? c.n_samples : fallback;
}

RunResult finish(std::string csv, bool pass, const std::string& what) {
  RunResult r;
  r.csv = std::move(csv);
  r.exit_code = pass ? exit_ok : exit_stat_fail;
  r.summary = (pass ? "PASS " : "FAIL ") + what;
  return r;
}

RunResult finish_ok(std::string csv, const std::string& what) {
  RunResult r;
  r.csv = std::move(csv);
  r.summary = "OK " + what;
  return r;
}

std::vector<Vertex> drop_start(std::vector<Vertex> path) {
  path.erase(path.begin());
  return path;
}

BoxSpec box_of(const GraphConfig& g) {
  BoxSpec s;
  s.dimension = g.dimension;
  s.half_side = g.half_side;
  s.wired = g.wired;
  return s;
}

// A graph with random weights when the config asks for a gamma law.
WeightedGraph draw_graph(const GraphConfig& g, Rng& rng) {
  if (!g.gamma_shape) return build_graph(g);
  if (g.kind == "box") {
    if (!g.wired) throw std::invalid_argument("gamma weights on a box need a wired box");
    return draw_wired_box(box_of(g), WeightLaw::gamma_shape(*g.gamma_shape), g.theta, rng);
  }
  GraphConfig fixed = g;
  fixed.gamma_shape.reset();
  const WeightedGraph base = build_graph(fixed);
  const std::vector<double> shapes(base.edges().size(), *g.gamma_shape);
  return base.with_edge_weights(sample_gamma_weights(shapes, rng));
}

void require_fixed_weights(const ExperimentConfig& c) {
  if (c.graph.gamma_shape) throw std::invalid_argument(c.command + " needs deterministic weights");
}

void check_start(const WeightedGraph& g, Vertex i0) {
  if (i0 >= g.vertex_count()) throw std::invalid_argument("i0 is not a vertex of the graph");
}

std::string pass_flag(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------------------

RunResult run_sample_potential(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  const WeightedGraph graph = build_graph(c.graph);
  const std::size_t n = samples_or(c, 1);
  Csv csv{"sample", "vertex", "beta"};
  for (std::size_t r = 0; r < n; ++r) {
    const PotentialSample s = sample_nu(graph, derive_seed(seed, r));
    for (Vertex v = 0; v < s.beta.size(); ++v) csv.row({std::to_string(r), std::to_string(v), num(s.beta[v])});
  }
  return finish_ok(csv.str(), "sample-potential: " + std::to_string(n) + " sample(s)");
}

RunResult run_ward_check(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  const WeightedGraph graph = build_graph(c.graph);
  const std::size_t n = graph.vertex_count();
  check_start(graph, c.i0);
  std::vector<double> k = c.k.empty() ? std::vector<double>(n, 0.5) : c.k;
  if (k.size() != n) throw std::invalid_argument("k needs one entry per vertex");
  const std::size_t samples = samples_or(c, 100000);
  const double kse = c.tol.se_multiple;

  Csv csv{"identity", "closed", "estimate", "stderr", "n", "seed", "pass"};
  bool all = true;
  auto add = [&](const std::string& name, double closed, const EstimateReport& mc) {
    const bool ok = mc.within(closed, kse);
    all = all && ok;
    csv.row({name, num(closed), num(mc.estimate), num(mc.std_error), std::to_string(mc.n), num(mc.seed), pass_flag(ok)});
  };
  add("laplace", laplace_closed(graph, k), laplace_mc(graph, k, samples, derive_seed(seed, 0), c.workers));
  if (n >= 2 && graph.eta_is_zero()) {
    const Vertex l = c.l ? *c.l : (c.i0 == n - 1 ? 0 : n - 1);
    if (l >= n || l == c.i0) throw std::invalid_argument("l must be a vertex different from i0");
    add("ward_xi", ward_xi_closed(graph, k, c.i0, l),
        ward_xi_mc(graph, k, c.i0, l, samples, derive_seed(seed, 1), c.workers));
    add("ward_ratio", ward_ratio_closed(graph, c.i0, l),
        ward_ratio_mc(graph, c.i0, l, samples, derive_seed(seed, 2), c.workers));
  }
  return finish(csv.str(), all, "ward-check: Monte-Carlo vs closed forms within " + num(kse) + " SE");
}

RunResult run_green_check(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  if (c.max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  const WeightedGraph graph = build_graph(c.graph);
  const std::size_t samples = samples_or(c, 100);
  Csv csv{"sample", "seed", "max_abs_diff", "identity_residual", "pass"};
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t r = 0; r < samples; ++r) {
    const std::uint64_t s = derive_seed(seed, r);
    const PotentialSample p = sample_nu(graph, s);
    const SchrodingerMatrix h = assemble_h(graph, p.beta);
    const GreenMatrix g = green(h);
    const double residual = identity_residual(h, g);
    double diff = std::numeric_limits<double>::infinity();
    try {
      diff = (rw_expansion(graph, p.beta, c.max_len, c.workers) - g.values).cwiseAbs().maxCoeff();
    } catch (const std::invalid_argument&) {
      // Some 2 beta_i <= 0: the expansion is undefined for this sample.
    }
    const bool ok = diff < c.tol.expansion_tol && residual < c.tol.identity_tol;
    if (!ok) ++failures;
    worst = std::max(worst, diff);
    csv.row({std::to_string(r), num(s), num(diff), num(residual), pass_flag(ok)});
  }
  return finish(csv.str(), failures == 0,
                "green-check: " + std::to_string(samples - failures) + "/" + std::to_string(samples) +
                    " samples within tolerance, worst expansion error " + num(worst));
}

StopRule stop_rule(const ExperimentConfig& c) {
  if (c.time && c.jumps) throw std::invalid_argument("give either time or jumps, not both");
  if (c.time) return StopRule::at_time(*c.time);
  return StopRule::after_jumps(c.jumps.value_or(10));
}

RunResult run_simulate(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  Rng rng(seed);
  const WeightedGraph graph = draw_graph(c.graph, rng);
  check_start(graph, c.i0);
  std::ostringstream out;
  if (c.variant == "vrjp") {
    Trajectory t = simulate_vrjp(graph, c.i0, stop_rule(c), rng);
    if (c.time_changed) t = time_change(graph, t);
    write_trajectory_csv(out, t);
    return finish_ok(out.str(), "simulate vrjp: " + std::to_string(t.jump_count()) + " jumps");
  }
  if (c.variant == "errw") {
    if (c.time) throw std::invalid_argument("errw is a discrete walk; use jumps");
    const auto path = simulate_errw(graph, c.i0, c.jumps.value_or(10), rng);
    Csv csv{"step", "state"};
    for (std::size_t s = 0; s < path.size(); ++s) csv.row({std::to_string(s), std::to_string(path[s])});
    return finish_ok(csv.str(), "simulate errw: " + std::to_string(path.size() - 1) + " steps");
  }
  if (c.variant == "quenched") {
    const PotentialSample p = sample_nu(graph, rng);
    const GreenMatrix g = green(assemble_h(graph, p.beta));
    const Trajectory t = simulate_quenched_jump(graph, g, c.i0, stop_rule(c), rng);
    write_trajectory_csv(out, t);
    return finish_ok(out.str(), "simulate quenched: " + std::to_string(t.jump_count()) + " jumps");
  }
  throw std::invalid_argument("simulate needs a variant: vrjp, errw or quenched");
}

RunResult prefix_report(const std::string& name, const PrefixTestResult& t, double p_min) {
  Csv csv{"record", "label", "count_a", "count_b", "value"};
  for (const auto& row : t.table) csv.row({"bin", row.label, std::to_string(row.count_a), std::to_string(row.count_b), ""});
  csv.row({"statistic", "", "", "", num(t.statistic)});
  csv.row({"dof", "", "", "", num(t.dof)});
  csv.row({"p_value", "", "", "", num(t.p_value)});
  return finish(csv.str(), t.p_value > p_min, name + ": chi-square p = " + num(t.p_value));
}

RunResult run_mixture_test(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  const WeightedGraph graph = build_graph(c.graph);
  check_start(graph, c.i0);
  if (!graph.eta_is_zero()) throw std::invalid_argument("mixture test needs eta == 0");
  if (c.prefix_len == 0) throw std::invalid_argument("prefix_len must be >= 1");
  const std::size_t samples = samples_or(c, 100000);
  const auto stop = StopRule::after_jumps(c.prefix_len);
  const auto vrjp = map_replicas<std::vector<Vertex>>(samples, derive_seed(seed, 0), c.workers, [&](Rng& rng, std::size_t) {
    return drop_start(skeleton(time_change(graph, simulate_vrjp(graph, c.i0, stop, rng))));
  });
  const auto mixed = map_replicas<std::vector<Vertex>>(samples, derive_seed(seed, 1), c.workers, [&](Rng& rng, std::size_t) {
    const PotentialSample p = sample_nu(graph, rng);
    const GreenMatrix g = green(assemble_h(graph, p.beta));
    return drop_start(skeleton(simulate_quenched_jump(graph, g, c.i0, stop, rng)));
  });
  return prefix_report("mixture-test", path_prefix_test(vrjp, mixed, c.prefix_len), c.tol.p_min);
}

RunResult run_errw_equivalence(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  const WeightedGraph graph = build_graph(c.graph);
  check_start(graph, c.i0);
  if (c.prefix_len == 0) throw std::invalid_argument("prefix_len must be >= 1");
  const std::size_t samples = samples_or(c, 100000);
  std::vector<double> shapes;
  for (const Edge& e : graph.edges()) shapes.push_back(e.weight);
  const WeightedGraph unit = graph.with_theta(std::vector<double>(graph.vertex_count(), 1.0));
  const auto errw = map_replicas<std::vector<Vertex>>(samples, derive_seed(seed, 0), c.workers, [&](Rng& rng, std::size_t) {
    return drop_start(simulate_errw(graph, c.i0, c.prefix_len, rng));
  });
  const auto vrjp = map_replicas<std::vector<Vertex>>(samples, derive_seed(seed, 1), c.workers, [&](Rng& rng, std::size_t) {
    const WeightedGraph g = unit.with_edge_weights(sample_gamma_weights(shapes, rng));
    return drop_start(skeleton(simulate_vrjp(g, c.i0, StopRule::after_jumps(c.prefix_len), rng)));
  });
  return prefix_report("errw-equivalence", path_prefix_test(errw, vrjp, c.prefix_len), c.tol.p_min);
}

RunResult run_fractional_decay(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  if (c.graph.kind != "box" || !c.graph.wired) throw std::invalid_argument("fractional-decay needs a wired box");
  FractionalMomentRequest req;
  req.box = box_of(c.graph);
  req.law = c.graph.gamma_shape ? WeightLaw::gamma_shape(*c.graph.gamma_shape) : WeightLaw::fixed(c.graph.weight);
  req.theta = c.graph.theta;
  req.exponent = c.exponent;
  req.targets = c.targets.empty() ? axis_targets(req.box) : c.targets;
  req.n_samples = samples_or(c, 2000);
  req.seed = seed;
  req.workers = c.workers;
  const auto est = fractional_moment(req);

  Csv csv{"record", "distance", "offset", "value", "stderr", "n", "seed"};
  for (const auto& t : est) {
    std::string off;
    for (std::size_t k = 0; k < t.offset.size(); ++k) off += (k ? ";" : "") + std::to_string(t.offset[k]);
    csv.row({"moment", std::to_string(t.distance), off, num(t.report.estimate), num(t.report.std_error),
             std::to_string(t.report.n), num(t.report.seed)});
  }
  const DecayFit fit = fit_decay(est);
  const double constant = moment_constant(req.theta, req.exponent);
  csv.row({"kappa", "", "", num(fit.kappa), "", "", ""});
  csv.row({"r_squared", "", "", num(fit.r_squared), "", "", ""});
  csv.row({"moment_constant", "0", "", num(constant), "", "", ""});

  // Monotone in distance: compare each distance class with the next one.
  std::vector<const TargetEstimate*> order;
  for (const auto& t : est) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->distance < b->distance; });
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    if (order[k]->distance == order[k + 1]->distance) continue;
    const auto& a = order[k]->report;
    const auto& b = order[k + 1]->report;
    const double slack = c.tol.monotone_se * std::hypot(a.std_error, b.std_error);
    if (b.estimate > a.estimate + slack) monotone = false;
  }
  bool origin_ok = true;
  bool has_origin = false;
  for (const auto& t : est)
    if (t.distance == 0) {
      has_origin = true;
      origin_ok = origin_ok && t.report.within(constant, c.tol.se_multiple);
    }
  const bool pass = monotone && fit.kappa > 0.0 && fit.r_squared > c.tol.r_squared_min && origin_ok;
  std::string what = "fractional-decay: kappa = " + num(fit.kappa) + ", R^2 = " + num(fit.r_squared) +
                     (monotone ? ", decreasing" : ", not decreasing");
  if (has_origin) what += origin_ok ? ", x=0 matches the moment constant" : ", x=0 off the moment constant";
  return finish(csv.str(), pass, what);
}

RunResult run_thresholds(const ExperimentConfig& c) {
  if (c.d < 1) throw std::invalid_argument("d must be >= 1");
  const double theta = c.graph.theta;
  const double constant = moment_constant(theta, 0.25);
  const Thresholds t = threshold_w(c.d, theta);
  const double a = threshold_errw(c.d);
  const double target = threshold_w(c.d, 1.0).wprime_bar;
  const double ratio = std::exp(boost::math::lgamma(a + 0.25) - boost::math::lgamma(a));
  const double residual = std::abs(ratio - target) / target;
  Csv csv{"quantity", "value", "note"};
  csv.row({"d", std::to_string(c.d), ""});
  csv.row({"theta", num(theta), ""});
  csv.row({"moment_constant", num(constant), "E[G(0;0)^(1/4)] = 2^(-1/4) Gamma(1/4) theta^(1/2) / sqrt(pi)"});
  csv.row({"printed_lemma_constant", num(printed_lemma_constant(theta)),
           "printed as Gamma(1/4) theta^(1/2) / (2^(1/3) sqrt(pi)); differs from moment_constant"});
  csv.row({"wprime_bar", num(t.wprime_bar), "1 / (2 d moment_constant)"});
  csv.row({"w_bar_4", num(t.w_bar_4), "wprime_bar^4: deterministic-weight threshold"});
  csv.row({"printed_wbar_stated", num(printed_threshold_stated(c.d)), "printed approximation 0.24/d"});
  csv.row({"printed_wbar_formula", num(printed_threshold_formula(c.d)),
           "printed closed form sqrt(pi)/(Gamma(1/4) 2^(5/3) d); does not evaluate to 0.24/d"});
  csv.row({"a_bar", num(a), "root of Gamma(a+1/4)/Gamma(a) = wprime_bar at theta = 1"});
  csv.row({"printed_a_bar_3", num(printed_abar_3), "printed value for d = 3; not reproduced by the root above"});
  csv.row({"root_residual", num(residual), "relative residual of the a_bar root"});
  const bool pass = residual < 1e-10;
  return finish(csv.str(), pass,
                "thresholds: wprime_bar = " + num(t.wprime_bar) + " (printed 0.24/d = " +
                    num(printed_threshold_stated(c.d)) + "), a_bar = " + num(a) +
                    " (printed a_bar(3) = 0.65); printed constants disagree with their own formulas");
}

struct SpectrumSummary {
  std::vector<double> ipr;
  std::vector<double> length;
  std::vector<double> eigenvalues;
  double residual = 0.0;
  double reconstruction = 0.0;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double hi = v[m];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

RunResult run_localization(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  std::vector<double> thetas = c.thetas.empty() ? std::vector<double>{0.1, 10.0} : c.thetas;
  const std::size_t samples = samples_or(c, 200);
  std::unique_ptr<Csv> csv;
  if (c.detail) csv = std::make_unique<Csv>(Csv{"theta", "sample", "index", "eigenvalue", "localization_length", "ipr"});
  else
    csv = std::make_unique<Csv>(Csv{"theta", "n", "median_ipr", "median_localization_length", "max_eigen_residual",
                                    "max_reconstruction_error"});
  bool accurate = true;
  std::vector<std::pair<double, double>> medians;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    GraphConfig gc = c.graph;
    gc.theta = thetas[t];
    const WeightedGraph graph = build_graph(gc);
    const auto rows = map_replicas<SpectrumSummary>(samples, derive_seed(seed, t), c.workers, [&](Rng& rng, std::size_t) {
      const PotentialSample p = sample_nu(graph, rng);
      const SchrodingerMatrix h = assemble_h(graph, p.beta);
      const SpectralReport r = spectrum(h, graph);
      SpectrumSummary s;
      s.ipr = r.ipr;
      s.length = r.localization_length;
      s.eigenvalues.assign(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
      s.residual = eigen_residual(h, r);
      s.reconstruction = reconstruction_error(h, r);
      return s;
    });
    std::vector<double> ipr, len;
    double res = 0.0, rec = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& s = rows[r];
      ipr.insert(ipr.end(), s.ipr.begin(), s.ipr.end());
      len.insert(len.end(), s.length.begin(), s.length.end());
      res = std::max(res, s.residual);
      rec = std::max(rec, s.reconstruction);
      if (c.detail)
        for (std::size_t k = 0; k < s.ipr.size(); ++k)
          csv->row({num(thetas[t]), std::to_string(r), std::to_string(k), num(s.eigenvalues[k]), num(s.length[k]), num(s.ipr[k])});
    }
    accurate = accurate && res < c.tol.eigen_tol && rec < c.tol.eigen_tol;
    const double mi = median(ipr);
    medians.emplace_back(thetas[t], mi);
    if (!c.detail) csv->row({num(thetas[t]), std::to_string(samples), num(mi), num(median(len)), num(res), num(rec)});
  }
  std::sort(medians.begin(), medians.end());
  bool contrast = true;
  for (std::size_t k = 0; k + 1 < medians.size(); ++k) contrast = contrast && medians[k].second > medians[k + 1].second;
  std::string what = "localization: median IPR ";
  for (std::size_t k = 0; k < medians.size(); ++k)
    what += (k ? ", " : "") + std::string("theta=") + num(medians[k].first) + ": " + num(medians[k].second);
  what += contrast ? " (decreasing in theta)" : " (not decreasing in theta)";
  what += accurate ? ", residuals within tolerance" : ", residuals above tolerance";
  return finish(csv->str(), contrast && accurate, what);
}

RunResult run_tau_check(const ExperimentConfig& c) {
  const std::vector<double> thetas = c.thetas.empty() ? std::vector<double>{0.1, 1.0, 10.0} : c.thetas;
  const std::vector<double> shifts = c.d0s.empty() ? std::vector<double>{0.0, 3.0} : c.d0s;
  Csv csv{"theta", "d0", "exponent", "total_mass", "pass"};
  bool all = true;
  std::string failures;
  for (double th : thetas) {
    if (!(th > 0.0)) throw std::invalid_argument("theta must be positive");
    for (double s : shifts) {
      const SingleSiteDensity p{th, s};
      const RegularityFit fit = tau_regularity(p);
      const bool ok = std::abs(fit.exponent - c.tol.tau_target) <= c.tol.tau_tol;
      if (!ok) failures += " theta=" + num(th) + ",d0=" + num(s) + ":" + num(fit.exponent);
      all = all && ok;
      csv.row({num(th), num(s), num(fit.exponent), num(single_site_mass(p, std::numeric_limits<double>::infinity())),
               pass_flag(ok)});
    }
  }
  return finish(csv.str(), all,
                "tau-check: edge exponent within " + num(c.tol.tau_tol) + " of " + num(c.tol.tau_target) +
                    (all ? " everywhere" : "; off at" + failures));
}

RunResult run_variance_check(const ExperimentConfig& c) {
  const std::uint64_t seed = need_seed(c);
  require_fixed_weights(c);
  if (c.graph.kind != "box") throw std::invalid_argument("variance-check needs a box");
  BoxSpec spec = box_of(c.graph);
  spec.wired = true;
  const VarianceCheck v =
      variance_check(spec, c.graph.weight, c.graph.theta, samples_or(c, 100000), seed, c.workers);
  const bool ok_stated = v.variance.within(v.stated, c.tol.se_multiple);
  const bool ok_exact = v.variance.within(v.exact, c.tol.se_multiple);
  Csv csv{"d", "w", "theta", "variance", "stderr", "n", "seed", "stated", "exact", "within_stated", "within_exact"};
  csv.row({std::to_string(spec.dimension), num(c.graph.weight), num(c.graph.theta), num(v.variance.estimate),
           num(v.variance.std_error), std::to_string(v.variance.n), num(v.variance.seed), num(v.stated), num(v.exact),
           pass_flag(ok_stated), pass_flag(ok_exact)});
  return finish(csv.str(), ok_stated,
                "variance-check: Var = " + num(v.variance.estimate) + " +- " + num(v.variance.std_error) +
                    ", (1+dW)/(2 theta^2) = " + num(v.stated) + ", exact marginal variance = " + num(v.exact));
}

using Runner = std::function<RunResult(const ExperimentConfig&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"sample-potential", run_sample_potential}, {"ward-check", run_ward_check},
      {"green-check", run_green_check},           {"simulate", run_simulate},
      {"mixture-test", run_mixture_test},         {"errw-equivalence", run_errw_equivalence},
      {"fractional-decay", run_fractional_decay}, {"thresholds", run_thresholds},
      {"localization", run_localization},         {"tau-check", run_tau_check},
      {"variance-check", run_variance_check},
  };
  return table;
}

// --- JSON ------------------------------------------------------------------

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config field '" + key + "' has the wrong type");
  }
}

void apply_graph(GraphConfig& g, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config field 'graph' must be an object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "kind") g.kind = get_as<std::string>(v, key);
    else if (key == "dimension") g.dimension = get_as<int>(v, key);
    else if (key == "half_side") g.half_side = get_as<int>(v, key);
    else if (key == "wired") g.wired = get_as<bool>(v, key);
    else if (key == "exterior_field") g.exterior_field = get_as<bool>(v, key);
    else if (key == "size") g.size = get_as<std::size_t>(v, key);
    else if (key == "weight") g.weight = get_as<double>(v, key);
    else if (key == "gamma_shape") g.gamma_shape = v.is_null() ? std::nullopt : std::optional<double>(get_as<double>(v, key));
    else if (key == "theta") g.theta = get_as<double>(v, key);
    else if (key == "graph") g.explicit_graph = v;
    else throw std::invalid_argument("unknown graph field '" + key + "'");
  }
}

void apply_tolerances(Tolerances& t, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config field 'tolerances' must be an object");
  const std::map<std::string, double*> fields{
      {"se_multiple", &t.se_multiple},     {"p_min", &t.p_min},         {"expansion_tol", &t.expansion_tol},
      {"identity_tol", &t.identity_tol},   {"eigen_tol", &t.eigen_tol}, {"tau_target", &t.tau_target},
      {"tau_tol", &t.tau_tol},             {"r_squared_min", &t.r_squared_min},
      {"monotone_se", &t.monotone_se}};
  for (const auto& [key, v] : doc.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("unknown tolerance '" + key + "'");
    *it->second = get_as<double>(v, key);
  }
}

}  // namespace

WeightedGraph build_graph(const GraphConfig& g) {
  if (!(g.weight > 0.0)) throw std::invalid_argument("graph weight must be positive");
  if (!(g.theta > 0.0)) throw std::invalid_argument("graph theta must be positive");
  if (g.kind == "box") {
    if (g.wired && g.exterior_field) throw std::invalid_argument("a box is either wired or carries an exterior field");
    BoxSpec spec = box_of(g);
    spec.wired = false;
    WeightedGraph box = build_box(spec, g.weight, g.theta);
    if (g.exterior_field) {
      std::vector<double> eta(box.vertex_count());
      for (Vertex v = 0; v < eta.size(); ++v)
        eta[v] = g.theta * g.weight * static_cast<double>(2 * spec.dimension - static_cast<int>(box.degree(v)));
      return box.with_eta(std::move(eta));
    }
    return g.wired ? wire_box(box, g.theta) : box;
  }
  if (g.kind == "path") {
    if (g.size < 1) throw std::invalid_argument("path needs at least one vertex");
    return build_path(g.size, g.weight, g.theta);
  }
  if (g.kind == "cycle") return build_cycle(g.size, g.weight, g.theta);
  if (g.kind == "triangle") return build_cycle(3, g.weight, g.theta);
  if (g.kind == "star") {
    if (g.size < 1) throw std::invalid_argument("star needs at least one arm");
    std::vector<Edge> edges;
    for (Vertex v = 1; v <= g.size; ++v) edges.push_back({0, v, g.weight});
    return WeightedGraph::from_edges(g.size + 1, std::move(edges), std::vector<double>(g.size + 1, g.theta));
  }
  if (g.kind == "edges") {
    if (g.explicit_graph.is_null()) throw std::invalid_argument("graph kind 'edges' needs a 'graph' document");
    return graph_from_json(g.explicit_graph);
  }
  throw std::invalid_argument("unknown graph kind '" + g.kind + "'");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : runners()) n.push_back(k);
    return n;
  }();
  return names;
}

ExperimentConfig default_config(const std::string& command) {
  if (!runners().count(command)) throw std::invalid_argument("unknown subcommand '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  GraphConfig& g = c.graph;
  if (command == "green-check") {
    g.kind = "box";
    g.dimension = 2;
    g.half_side = 1;
    g.exterior_field = true;
  } else if (command == "mixture-test" || command == "errw-equivalence") {
    g.kind = "triangle";
  } else if (command == "fractional-decay") {
    g.kind = "box";
    g.dimension = 1;
    g.half_side = 20;
    g.wired = true;
    g.weight = 0.01;
  } else if (command == "localization") {
    g.kind = "path";
    g.size = 100;
  } else if (command == "variance-check") {
    g.kind = "box";
    g.dimension = 1;
    g.half_side = 2;
    g.wired = true;
  } else if (command == "simulate") {
    c.variant = "vrjp";
  }
  return c;
}

ExperimentConfig apply_config(ExperimentConfig c, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config document must be an object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "command") {
      const auto name = get_as<std::string>(v, key);
      if (!c.command.empty() && name != c.command)
        throw std::invalid_argument("config is for '" + name + "', not '" + c.command + "'");
      c.command = name;
    } else if (key == "variant") c.variant = get_as<std::string>(v, key);
    else if (key == "graph") apply_graph(c.graph, v);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "out") c.out = get_as<std::string>(v, key);
    else if (key == "workers") c.workers = get_as<int>(v, key);
    else if (key == "n_samples") c.n_samples = get_as<std::size_t>(v, key);
    else if (key == "exponent") c.exponent = get_as<double>(v, key);
    else if (key == "prefix_len") c.prefix_len = get_as<std::size_t>(v, key);
    else if (key == "targets") c.targets = get_as<std::vector<std::vector<int>>>(v, key);
    else if (key == "k") c.k = get_as<std::vector<double>>(v, key);
    else if (key == "i0") c.i0 = get_as<Vertex>(v, key);
    else if (key == "l") c.l = get_as<Vertex>(v, key);
    else if (key == "time") c.time = get_as<double>(v, key);
    else if (key == "jumps") c.jumps = get_as<std::size_t>(v, key);
    else if (key == "time_changed") c.time_changed = get_as<bool>(v, key);
    else if (key == "max_len") c.max_len = get_as<int>(v, key);
    else if (key == "d") c.d = get_as<int>(v, key);
    else if (key == "thetas") c.thetas = get_as<std::vector<double>>(v, key);
    else if (key == "d0s") c.d0s = get_as<std::vector<double>>(v, key);
    else if (key == "detail") c.detail = get_as<bool>(v, key);
    else if (key == "tolerances") apply_tolerances(c.tol, v);
    else throw std::invalid_argument("unknown config field '" + key + "'");
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json g{{"kind", c.graph.kind},       {"dimension", c.graph.dimension}, {"half_side", c.graph.half_side},
         {"wired", c.graph.wired},     {"exterior_field", c.graph.exterior_field},
         {"size", c.graph.size},       {"weight", c.graph.weight},       {"theta", c.graph.theta}};
  g["gamma_shape"] = c.graph.gamma_shape ? json(*c.graph.gamma_shape) : json(nullptr);
  if (!c.graph.explicit_graph.is_null()) g["graph"] = c.graph.explicit_graph;
  json doc{{"command", c.command}, {"graph", g},           {"workers", c.workers},
           {"n_samples", c.n_samples}, {"exponent", c.exponent}, {"prefix_len", c.prefix_len},
           {"targets", c.targets}, {"k", c.k},             {"i0", c.i0},
           {"time_changed", c.time_changed}, {"max_len", c.max_len}, {"d", c.d},
           {"thetas", c.thetas},   {"d0s", c.d0s},         {"detail", c.detail}};
  if (!c.variant.empty()) doc["variant"] = c.variant;
  if (c.seed) doc["seed"] = *c.seed;
  if (!c.out.empty()) doc["out"] = c.out;
  if (c.l) doc["l"] = *c.l;
  if (c.time) doc["time"] = *c.time;
  if (c.jumps) doc["jumps"] = *c.jumps;
  doc["tolerances"] = json{{"se_multiple", c.tol.se_multiple},     {"p_min", c.tol.p_min},
                           {"expansion_tol", c.tol.expansion_tol}, {"identity_tol", c.tol.identity_tol},
                           {"eigen_tol", c.tol.eigen_tol},         {"tau_target", c.tol.tau_target},
                           {"tau_tol", c.tol.tau_tol},             {"r_squared_min", c.tol.r_squared_min},
                           {"monotone_se", c.tol.monotone_se}};
  return doc;
}

RunResult run_experiment(const ExperimentConfig& config) {
  const auto it = runners().find(config.command);
  if (it == runners().end()) return {exit_invalid, "", "ERROR unknown subcommand '" + config.command + "'"};
  if (config.workers < 0) return {exit_invalid, "", "ERROR workers must be >= 0"};
  try {
    return it->second(config);
  } catch (const std::invalid_argument& e) {
    return {exit_invalid, "", std::string("ERROR invalid input: ") + e.what()};
  } catch (const std::out_of_range& e) {
    return {exit_invalid, "", std::string("ERROR invalid input: ") + e.what()};
  } catch (const std::exception& e) {
    return {1, "", std::string("ERROR ") + e.what()};
  }
}

}  // namespace vrjp
