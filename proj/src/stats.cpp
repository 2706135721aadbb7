#include "vrjp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace vrjp {

bool EstimateReport::within(double target, double k) const {
  const double diff = std::abs(estimate - target);
  if (std_error == 0.0) return diff <= 1e-12 * std::max(1.0, std::abs(target));
  return diff <= k * std_error;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimateReport summarize(std::span<const double> values, std::uint64_t seed) {
  EstimateReport r;
  r.n = values.size();
  r.seed = seed;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.estimate = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - r.estimate) * (values[i] - r.estimate);
    const double var = pairwise_sum(sq) / (n - 1.0);
    r.std_error = std::sqrt(var / n);
  }
  return r;
}

EstimateReport summarize_variance(std::span<const double> values, std::uint64_t seed) {
  EstimateReport r;
  r.n = values.size();
  r.seed = seed;
  if (values.size() < 2) return r;
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  std::vector<double> m2(values.size());
  std::vector<double> m4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    m2[i] = d * d;
    m4[i] = d * d * d * d;
  }
  const double second = pairwise_sum(m2) / n;
  const double fourth = pairwise_sum(m4) / n;
  r.estimate = second * n / (n - 1.0);
  r.std_error = std::sqrt(std::max(0.0, fourth - second * second) / n);
  return r;
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Stephens' finite-sample correction of the asymptotic statistic.
double ks_pvalue(double d, double n_eff) {
  const double root = std::sqrt(n_eff);
  return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return {d, ks_pvalue(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_pvalue(d, na * nb / (na + nb))};
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

PrefixTestResult path_prefix_test(std::span<const std::vector<std::size_t>> samples_a,
                                  std::span<const std::vector<std::size_t>> samples_b,
                                  std::size_t prefix_len) {
  if (samples_a.empty() || samples_b.empty()) throw std::invalid_argument("empty sample set");
  if (prefix_len == 0) throw std::invalid_argument("prefix_len must be >= 1");

  auto label = [prefix_len](const std::vector<std::size_t>& path) {
    std::string s;
    const std::size_t len = std::min(prefix_len, path.size());
    for (std::size_t k = 0; k < len; ++k) {
      if (k) s += '-';
      s += std::to_string(path[k]);
    }
    return s;
  };
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& p : samples_a) ++counts[label(p)].first;
  for (const auto& p : samples_b) ++counts[label(p)].second;

  const double na = static_cast<double>(samples_a.size());
  const double nb = static_cast<double>(samples_b.size());
  const double total = na + nb;
  auto min_expected = [&](std::size_t a, std::size_t b) {
    return static_cast<double>(a + b) * std::min(na, nb) / total;
  };

  PrefixTestResult result;
  ContingencyRow pooled{"(pooled)", 0, 0};
  for (const auto& [key, c] : counts) {
    if (min_expected(c.first, c.second) < 5.0) {
      pooled.count_a += c.first;
      pooled.count_b += c.second;
    } else {
      result.table.push_back({key, c.first, c.second});
    }
  }
  if (pooled.count_a + pooled.count_b > 0) {
    if (min_expected(pooled.count_a, pooled.count_b) < 5.0 && !result.table.empty()) {
      // Still too thin: fold into the smallest regular bin.
      auto smallest = std::min_element(result.table.begin(), result.table.end(), [](const auto& x, const auto& y) {
        return x.count_a + x.count_b < y.count_a + y.count_b;
      });
      smallest->count_a += pooled.count_a;
      smallest->count_b += pooled.count_b;
      smallest->label += "+(pooled)";
    } else {
      result.table.push_back(pooled);
    }
  }
  if (result.table.size() < 2) throw std::invalid_argument("degenerate comparison: fewer than two bins");

  double chi2 = 0.0;
  for (const auto& row : result.table) {
    const double pooled_count = static_cast<double>(row.count_a + row.count_b);
    const double ea = pooled_count * na / total;
    const double eb = pooled_count * nb / total;
    chi2 += (static_cast<double>(row.count_a) - ea) * (static_cast<double>(row.count_a) - ea) / ea;
    chi2 += (static_cast<double>(row.count_b) - eb) * (static_cast<double>(row.count_b) - eb) / eb;
  }
  result.statistic = chi2;
  result.dof = static_cast<double>(result.table.size() - 1);
  result.p_value = chi_square_sf(chi2, result.dof);
  return result;
}

double chi_square_gof_pvalue(std::span<const std::size_t> counts, std::span<const double> probabilities,
                             std::size_t fitted_parameters) {
  if (counts.size() != probabilities.size() || counts.size() < 2)
    throw std::invalid_argument("chi-square needs matching counts and probabilities");
  double n = 0.0;
  for (std::size_t c : counts) n += static_cast<double>(c);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probabilities[i];
    const double d = static_cast<double>(counts[i]) - e;
    chi2 += d * d / e;
  }
  return chi_square_sf(chi2, static_cast<double>(counts.size() - 1 - fitted_parameters));
}

}  // namespace vrjp
