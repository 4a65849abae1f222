#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "gpev/rng.hpp"

namespace gpev {

/// Random Fourier basis for the squared-exponential GP:
///   f(x) = sqrt(2/N) * sum_j a_j cos(w_j x + s_j).
struct RffBasis {
  Eigen::VectorXd amplitudes;
  Eigen::VectorXd frequencies;
  Eigen::VectorXd phases;  // radians, [0, 2*pi)
  double lambda = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(amplitudes.size()); }
  /// sqrt(2/N).
  double scale() const;
  /// Throws std::invalid_argument on length mismatch, bad phase, or lambda <= 0.
  void validate() const;
};

/// exp(-(x - x2)^2 / lambda).
double se_kernel(double x, double x2, double lambda);

/// a ~ N(0,1), w ~ N(0, 2/lambda), s ~ Unif[0, 2*pi), independently per coordinate.
RffBasis sample_basis(int n_basis, double lambda, Rng& rng);

double eval_surrogate(const RffBasis& basis, double x);

/// Phi(i, j) = sqrt(2/N) cos(w_j x_i + s_j).
Eigen::MatrixXd design_matrix(const RffBasis& basis, std::span<const double> xs);

/// round(n / 4.5) clamped to [10, n].
int default_n_basis(std::size_t n);

}  // namespace gpev
