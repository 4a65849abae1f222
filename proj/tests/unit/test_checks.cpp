#include <doctest.h>

#include <cmath>

#include "gpev/checks.hpp"
#include "oracles.hpp"

using namespace gpev;

TEST_CASE("kolmogorov p-values against reference values") {
  // Large-n limit: the Stephens factor tends to sqrt(n).
  const std::size_t n = 100000000;
  const double rn = std::sqrt(static_cast<double>(n));
  CHECK(ks_pvalue(0.5 / rn, n) == doctest::Approx(0.9639452436648751).epsilon(1e-4));
  CHECK(ks_pvalue(1.0 / rn, n) == doctest::Approx(0.26999967167735456).epsilon(1e-4));
  CHECK(ks_pvalue(1.36 / rn, n) == doctest::Approx(0.049485876755377876).epsilon(1e-4));
  CHECK(ks_pvalue(2.0 / rn, n) == doctest::Approx(0.0006709252557796953).epsilon(1e-3));
  CHECK(oracle::kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
}

TEST_CASE("ks_statistic") {
  const std::vector<double> s{0.1, 0.4, 0.7};
  CHECK(ks_statistic(s, [](double x) { return x; }) == doctest::Approx(0.3));
  CHECK_THROWS_AS(ks_statistic({}, [](double x) { return x; }), std::invalid_argument);
}

TEST_CASE("inverse_gamma_cdf against reference values") {
  CHECK(inverse_gamma_cdf(0.7, 2.5, 1.3) == doctest::Approx(0.5912394774053691).epsilon(1e-12));
  CHECK(inverse_gamma_cdf(2.0, 1.0, 0.5) == doctest::Approx(0.7788007830714049).epsilon(1e-12));
  CHECK(inverse_gamma_cdf(0.0, 1.0, 0.5) == 0.0);
}

TEST_CASE("suites are listed and dispatched") {
  const auto& names = check_suites();
  CHECK(names == std::vector<std::string>{"rff-moments", "kernel", "conjugacy", "invariance"});
  CHECK_THROWS_AS(run_checks("nonsense"), std::invalid_argument);
}

TEST_CASE("every built-in check passes at its default size") {
  for (const auto& suite : check_suites()) {
    const auto results = run_checks(suite);
    REQUIRE_FALSE(results.empty());
    for (const auto& r : results) {
      INFO(r.suite << ": " << r.name << " (" << r.detail << ")");
      CHECK(r.suite == suite);
      CHECK(r.passed);
    }
  }
}
