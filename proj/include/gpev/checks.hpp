#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gpev {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  /// Monte Carlo sample size for moment and conjugacy checks.
  int draws = 100000;
  /// Sample size for Kolmogorov-Smirnov checks.
  int ks_draws = 10000;
};

/// Suite names accepted by run_checks.
const std::vector<std::string>& check_suites();

/// Runs one suite, or every suite when `suite` is empty. Unknown names throw std::invalid_argument.
std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options = {});

/// sup |F_n - F| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic Kolmogorov p-value with the small-sample correction of Stephens.
double ks_pvalue(double statistic, std::size_t n);

/// P(V <= v) for V ~ Inverse-Gamma(shape, scale).
double inverse_gamma_cdf(double v, double shape, double scale);

}  // namespace gpev
