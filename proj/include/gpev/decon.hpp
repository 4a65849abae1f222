#pragma once

#include <span>
#include <vector>

#include "gpev/config.hpp"
#include "gpev/core_types.hpp"
#include "gpev/rng.hpp"

namespace gpev {

/// Deconvoluting kernel for Gaussian measurement error with sd `delta`.
struct DeconKernelSpec {
  FourierKernel kernel = FourierKernel::Smooth;
  double h = 1.0;
  double delta = 0.0;
  /// Simpson nodes on [-1, 1]; must be 1 mod 4 so the half-range rule is valid.
  int nodes = 513;

  void validate() const;
  /// delta^2 / (2 h^2): the exponent of the inverse error characteristic function at |t| = 1.
  double inflation_exponent() const { return delta * delta / (2.0 * h * h); }
};

/// Largest allowed inflation exponent before the kernel is refused.
inline constexpr double kMaxInflationExponent = 400.0;

/// Fourier transform of the base kernel: (1 - t^2)^3 or the indicator of [-1, 1].
double fourier_kernel(FourierKernel kind, double t);

/// K_n(u) = (1/2pi) int_{-1}^{1} cos(t u) phi_K(t) exp(delta^2 t^2 / (2 h^2)) dt,
/// precomputed quadrature weights reused across evaluations.
class DeconKernel {
 public:
  explicit DeconKernel(const DeconKernelSpec& spec);
  double operator()(double u) const;
  const DeconKernelSpec& spec() const { return spec_; }

 private:
  DeconKernelSpec spec_;
  double step_;
  std::vector<double> weights_;  // on t_k = k * step_, k = 0..m
};

double decon_kernel(double u, const DeconKernelSpec& spec);

struct DeconEstimate {
  std::vector<double> grid;
  std::vector<double> p_hat;
  /// NaN when only the density was requested.
  std::vector<double> f_hat;
  /// 1 where the regression denominator was raised to the floor.
  std::vector<int> clipped;
  double h = 0.0;
};

/// Relative floor applied to the regression denominator.
inline constexpr double kDenominatorFloor = 0.05;

DeconEstimate decon_density(const Dataset& data, const DeconKernelSpec& spec, std::span<const double> grid);
DeconEstimate decon_regression(const Dataset& data, const DeconKernelSpec& spec, std::span<const double> grid);

struct BandwidthTrace {
  std::vector<double> candidates;
  /// Mean held-out squared error; +inf for guarded or non-finite candidates.
  std::vector<double> cv_error;
  double selected = 0.0;
};

/// K-fold cross-validation of decon_regression over `candidates`. Ties go to the
/// larger bandwidth. Throws when every candidate is guarded.
BandwidthTrace select_bandwidth_trace(const Dataset& data, const DeconKernelSpec& base,
                                      std::span<const double> candidates, int folds, Rng& rng);
double select_bandwidth(const Dataset& data, const DeconKernelSpec& base, std::span<const double> candidates,
                        int folds, Rng& rng);

/// 24 geometric steps from 0.05 to 2, filtered by the inflation guard for `delta`.
std::vector<double> default_bandwidths(double delta);

}  // namespace gpev
