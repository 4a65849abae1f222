#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpev/rff_gp.hpp"
#include "gpev/summaries.hpp"
#include "oracles.hpp"

using namespace gpev;

namespace {
DrawMatrix constant_draws(std::size_t m, std::vector<double> value) { return DrawMatrix(m, std::move(value)); }
}  // namespace

TEST_CASE("nearest_rank") {
  const std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(nearest_rank(s, 0.025) == 1);
  CHECK(nearest_rank(s, 0.5) == 5);
  CHECK(nearest_rank(s, 0.95) == 10);
  CHECK(nearest_rank(s, 0.0) == 1);
  CHECK(nearest_rank(s, 1.0) == 10);
  CHECK_THROWS_AS(nearest_rank(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("posterior_mean") {
  const DrawMatrix one{{0.5, -1.0, 2.0}};
  CHECK(posterior_mean(one) == one.front());
  const DrawMatrix sym{{0.5, -1.0, 2.0}, {-0.5, 1.0, -2.0}};
  for (double v : posterior_mean(sym)) CHECK(v == 0.0);
  CHECK_THROWS_AS(posterior_mean(DrawMatrix{}), std::invalid_argument);
  CHECK_THROWS_AS(posterior_mean(DrawMatrix{{1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("surrogate prior draws have zero mean") {
  Rng rng(1);
  const std::vector<double> grid{-2.0, -0.5, 0.0, 1.0, 2.5};
  DrawMatrix draws;
  for (int r = 0; r < 10000; ++r) {
    const RffBasis b = sample_basis(20, 1.0, rng);
    std::vector<double> row;
    for (double x : grid) row.push_back(eval_surrogate(b, x));
    draws.push_back(row);
  }
  const auto m = posterior_mean(draws);
  // Prior variance of f(x) is 1 for every x.
  for (double v : m) CHECK(std::abs(v) < 4.0 / std::sqrt(10000.0));
}

TEST_CASE("pointwise_interval") {
  const auto [lo, hi] = pointwise_interval(constant_draws(50, {0.3, -2.0}));
  CHECK(lo == std::vector<double>{0.3, -2.0});
  CHECK(hi == std::vector<double>{0.3, -2.0});

  Rng rng(2);
  DrawMatrix gauss;
  for (int i = 0; i < 100000; ++i) gauss.push_back({rng.normal()});
  const auto [glo, ghi] = pointwise_interval(gauss);
  CHECK(std::abs(glo[0] + 1.959964) < 0.03);
  CHECK(std::abs(ghi[0] - 1.959964) < 0.03);

  CHECK_THROWS_AS(pointwise_interval(constant_draws(39, {1.0})), std::invalid_argument);
  CHECK_THROWS_AS(pointwise_interval(constant_draws(50, {1.0}), 1.0), std::invalid_argument);
}

TEST_CASE("simultaneous_band") {
  const std::vector<double> center{0.1, 0.2, 0.3};
  CHECK(simultaneous_band(constant_draws(40, center), center) == 0.0);
  DrawMatrix alt;
  const double eps = 0.25;
  for (int j = 0; j < 60; ++j) {
    std::vector<double> row = center;
    for (auto& v : row) v += (j % 2 ? eps : -eps);
    alt.push_back(row);
  }
  const double r = simultaneous_band(alt, center);
  CHECK(r == doctest::Approx(eps).epsilon(1e-12));
  CHECK(fraction_in_band(alt, center, r) == 1.0);
  CHECK(fraction_in_band(alt, center, eps / 2) == 0.0);
}

TEST_CASE("band covers at least the nominal share of draws") {
  Rng rng(3);
  for (double level : {0.5, 0.9, 0.95}) {
    DrawMatrix draws;
    for (int j = 0; j < 333; ++j) {
      std::vector<double> row;
      for (int g = 0; g < 20; ++g) row.push_back(rng.normal(std::sin(g), 0.3));
      draws.push_back(row);
    }
    const auto center = posterior_mean(draws);
    const double r = simultaneous_band(draws, center, level);
    CHECK(fraction_in_band(draws, center, r) >= level);
    CHECK(fraction_in_band(draws, center, std::nextafter(r, 0.0)) < level);
  }
}

TEST_CASE("amse") {
  const std::vector<double> grid{-1.0, 0.0, 2.0};
  auto f = [](double x) { return x * x; };
  CHECK(amse(std::vector<double>{1.0, 0.0, 4.0}, f, grid) == 0.0);
  CHECK(amse(std::vector<double>{1.5, 0.5, 4.5}, f, grid) == doctest::Approx(0.25));
  CHECK_THROWS_AS(amse(std::vector<double>{1.0}, f, grid), std::invalid_argument);
}

TEST_CASE("covariate_density_summary") {
  ChainSamples s;
  Draw d;
  d.mixture = MixtureSummary{{1.0}, {0.0}, {1.0}};
  s.draws.push_back(d);
  const std::vector<double> grid{-1.0, 0.0, 2.0};
  const auto dens = covariate_density_summary(s, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) CHECK(dens[g] == doctest::Approx(oracle::normal_pdf(grid[g], 0, 1)));
  s.draws.front().mixture.reset();
  CHECK_THROWS_AS(covariate_density_summary(s, grid), std::invalid_argument);
}

TEST_CASE("summarize") {
  Rng rng(4);
  DrawMatrix draws;
  for (int j = 0; j < 200; ++j) draws.push_back({rng.normal(), rng.normal(5.0, 2.0)});
  const std::vector<double> grid{0.0, 1.0};
  const FunctionSummary s = summarize(draws, grid, 0.9);
  CHECK(s.grid == grid);
  CHECK(s.level == 0.9);
  for (std::size_t g = 0; g < 2; ++g) {
    CHECK(s.lower[g] <= s.mean[g]);
    CHECK(s.mean[g] <= s.upper[g]);
    CHECK(s.band_lower()[g] == s.mean[g] - s.band_radius);
    CHECK(s.band_upper()[g] == s.mean[g] + s.band_radius);
  }
  CHECK(fraction_in_band(draws, s.mean, s.band_radius) >= 0.9);
  CHECK_THROWS_AS(summarize(draws, std::vector<double>{0.0}), std::invalid_argument);
}
