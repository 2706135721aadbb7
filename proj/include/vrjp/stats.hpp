#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vrjp {

/// Monte-Carlo mean with its standard error; the unit of all statistical output.
struct EstimateReport {
  double estimate = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
  std::uint64_t seed = 0;

  /// |estimate - target| <= k * stderr, with an exact-match allowance when
  /// the estimator has zero variance.
  bool within(double target, double k) const;
};

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

EstimateReport summarize(std::span<const double> values, std::uint64_t seed);

/// Variance estimate with a delta-method standard error.
EstimateReport summarize_variance(std::span<const double> values, std::uint64_t seed);

/// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ContingencyRow {
  std::string label;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

struct PrefixTestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::vector<ContingencyRow> table;  // bins after merging
};

/// Two-sample chi-square homogeneity test over the empirical laws of the
/// first `prefix_len` entries of each path. Bins whose expected count is
/// below 5 are pooled. Throws std::invalid_argument when fewer than two bins
/// remain or either sample is empty.
PrefixTestResult path_prefix_test(std::span<const std::vector<std::size_t>> samples_a,
                                  std::span<const std::vector<std::size_t>> samples_b,
                                  std::size_t prefix_len);

/// Pearson goodness-of-fit of counts against expected probabilities.
double chi_square_gof_pvalue(std::span<const std::size_t> counts, std::span<const double> probabilities,
                             std::size_t fitted_parameters = 0);

}  // namespace vrjp
