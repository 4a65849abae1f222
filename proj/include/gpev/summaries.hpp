#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gpev/sampler.hpp"

namespace gpev {

/// Rows are draws, columns are grid points.
using DrawMatrix = std::vector<std::vector<double>>;

/// Minimum number of draws for interval and band summaries.
inline constexpr std::size_t kMinDrawsForIntervals = 40;

struct FunctionSummary {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  double band_radius = 0.0;
  double level = 0.95;
  /// Posterior-mean covariate density on the grid, when available.
  std::optional<std::vector<double>> density;

  std::vector<double> band_lower() const;
  std::vector<double> band_upper() const;
};

/// Nearest-rank quantile of an ascending sample: the ceil(p * M)-th order statistic.
double nearest_rank(std::span<const double> sorted, double p);

std::vector<double> posterior_mean(const DrawMatrix& draws);
std::vector<double> posterior_mean(const ChainSamples& samples);

/// Per grid point, nearest-rank (1 - level)/2 and (1 + level)/2 quantiles.
std::pair<std::vector<double>, std::vector<double>> pointwise_interval(const DrawMatrix& draws, double level = 0.95);

/// Level-quantile of the sup-norm distances between each draw and `center`.
double simultaneous_band(const DrawMatrix& draws, std::span<const double> center, double level = 0.95);

/// Fraction of draws whose sup-norm distance from `center` is at most `radius`.
double fraction_in_band(const DrawMatrix& draws, std::span<const double> center, double radius);

/// Grid average of squared error.
double amse(std::span<const double> f_hat, const std::function<double(double)>& truth, std::span<const double> grid);

/// Average over draws of the mixture density on `grid`.
std::vector<double> covariate_density_summary(const ChainSamples& samples, std::span<const double> grid);

/// Mean, pointwise interval and band radius from f-draws on `grid`.
FunctionSummary summarize(const DrawMatrix& draws, std::span<const double> grid, double level = 0.95);

}  // namespace gpev
