#include "gpev/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpev/dpmm.hpp"

namespace gpev {

namespace {

void check_draws(const DrawMatrix& draws, std::size_t minimum, const char* who) {
  if (draws.size() < std::max<std::size_t>(minimum, 1)) {
    throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(std::max<std::size_t>(minimum, 1)) +
                                " draws, got " + std::to_string(draws.size()));
  }
  const std::size_t k = draws.front().size();
  for (const auto& d : draws) {
    if (d.size() != k) throw std::invalid_argument(std::string(who) + ": draws differ in length");
  }
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
}

}  // namespace

std::vector<double> FunctionSummary::band_lower() const {
  std::vector<double> out(mean.size());
  for (std::size_t k = 0; k < mean.size(); ++k) out[k] = mean[k] - band_radius;
  return out;
}

std::vector<double> FunctionSummary::band_upper() const {
  std::vector<double> out(mean.size());
  for (std::size_t k = 0; k < mean.size(); ++k) out[k] = mean[k] + band_radius;
  return out;
}

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank: empty sample");
  const auto m = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * m));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<double> posterior_mean(const DrawMatrix& draws) {
  check_draws(draws, 1, "posterior_mean");
  std::vector<double> mean(draws.front().size(), 0.0);
  for (const auto& d : draws) {
    for (std::size_t k = 0; k < d.size(); ++k) mean[k] += d[k];
  }
  for (double& v : mean) v /= static_cast<double>(draws.size());
  return mean;
}

std::vector<double> posterior_mean(const ChainSamples& samples) { return posterior_mean(samples.f_draws()); }

std::pair<std::vector<double>, std::vector<double>> pointwise_interval(const DrawMatrix& draws, double level) {
  check_level(level);
  check_draws(draws, kMinDrawsForIntervals, "pointwise_interval");
  const std::size_t k = draws.front().size();
  std::vector<double> lower(k), upper(k), column(draws.size());
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t j = 0; j < draws.size(); ++j) column[j] = draws[j][g];
    std::sort(column.begin(), column.end());
    lower[g] = nearest_rank(column, 0.5 * (1.0 - level));
    upper[g] = nearest_rank(column, 0.5 * (1.0 + level));
  }
  return {std::move(lower), std::move(upper)};
}

namespace {

std::vector<double> sup_distances(const DrawMatrix& draws, std::span<const double> center) {
  std::vector<double> d(draws.size(), 0.0);
  for (std::size_t j = 0; j < draws.size(); ++j) {
    if (draws[j].size() != center.size()) throw std::invalid_argument("band: center length differs from draws");
    for (std::size_t g = 0; g < center.size(); ++g) d[j] = std::max(d[j], std::abs(draws[j][g] - center[g]));
  }
  return d;
}

}  // namespace

double simultaneous_band(const DrawMatrix& draws, std::span<const double> center, double level) {
  check_level(level);
  check_draws(draws, kMinDrawsForIntervals, "simultaneous_band");
  std::vector<double> d = sup_distances(draws, center);
  std::sort(d.begin(), d.end());
  return nearest_rank(d, level);
}

double fraction_in_band(const DrawMatrix& draws, std::span<const double> center, double radius) {
  check_draws(draws, 1, "fraction_in_band");
  const std::vector<double> d = sup_distances(draws, center);
  const auto inside = std::count_if(d.begin(), d.end(), [&](double v) { return v <= radius; });
  return static_cast<double>(inside) / static_cast<double>(d.size());
}

double amse(std::span<const double> f_hat, const std::function<double(double)>& truth, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("amse: empty grid");
  if (f_hat.size() != grid.size()) throw std::invalid_argument("amse: estimate and grid lengths differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double e = f_hat[k] - truth(grid[k]);
    acc += e * e;
  }
  return acc / static_cast<double>(grid.size());
}

std::vector<double> covariate_density_summary(const ChainSamples& samples, std::span<const double> grid) {
  if (samples.empty()) throw std::invalid_argument("covariate_density_summary: no draws");
  if (!samples.has_mixture()) throw std::invalid_argument("covariate_density_summary: draws carry no mixture");
  std::vector<double> out(grid.size(), 0.0);
  for (const Draw& d : samples.draws) {
    const MixtureSummary& m = *d.mixture;
    for (std::size_t g = 0; g < grid.size(); ++g) out[g] += mixture_density(m.weights, m.means, m.precisions, grid[g]);
  }
  for (double& v : out) v /= static_cast<double>(samples.size());
  return out;
}

FunctionSummary summarize(const DrawMatrix& draws, std::span<const double> grid, double level) {
  check_draws(draws, kMinDrawsForIntervals, "summarize");
  if (draws.front().size() != grid.size()) throw std::invalid_argument("summarize: draws and grid lengths differ");
  FunctionSummary s;
  s.grid.assign(grid.begin(), grid.end());
  s.level = level;
  s.mean = posterior_mean(draws);
  auto [lo, hi] = pointwise_interval(draws, level);
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  s.band_radius = simultaneous_band(draws, s.mean, level);
  return s;
}

}  // namespace gpev
