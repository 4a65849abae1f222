#include "gpev/rff_gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpev {

double RffBasis::scale() const { return std::sqrt(2.0 / static_cast<double>(size())); }

void RffBasis::validate() const {
  if (amplitudes.size() < 1) throw std::invalid_argument("RffBasis: empty basis");
  if (frequencies.size() != amplitudes.size() || phases.size() != amplitudes.size()) {
    throw std::invalid_argument("RffBasis: amplitudes, frequencies and phases must have equal length");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("RffBasis: lambda must be > 0");
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    if (!(phases[j] >= 0.0 && phases[j] < 2.0 * std::numbers::pi)) {
      throw std::invalid_argument("RffBasis: phase outside [0, 2*pi)");
    }
  }
}

double se_kernel(double x, double x2, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("se_kernel: lambda must be > 0");
  const double d = x - x2;
  return std::exp(-d * d / lambda);
}

RffBasis sample_basis(int n_basis, double lambda, Rng& rng) {
  if (n_basis < 1) throw std::invalid_argument("sample_basis: n_basis must be ≥ 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_basis: lambda must be > 0");
  RffBasis b;
  b.lambda = lambda;
  b.amplitudes.resize(n_basis);
  b.frequencies.resize(n_basis);
  b.phases.resize(n_basis);
  const double w_sd = std::sqrt(2.0 / lambda);
  for (int j = 0; j < n_basis; ++j) {
    b.amplitudes[j] = rng.normal();
    b.frequencies[j] = w_sd * rng.normal();
    b.phases[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return b;
}

double eval_surrogate(const RffBasis& basis, double x) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < basis.amplitudes.size(); ++j) {
    acc += basis.amplitudes[j] * std::cos(basis.frequencies[j] * x + basis.phases[j]);
  }
  return basis.scale() * acc;
}

Eigen::MatrixXd design_matrix(const RffBasis& basis, std::span<const double> xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto N = basis.amplitudes.size();
  const double c = basis.scale();
  Eigen::MatrixXd phi(n, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      phi(i, j) = c * std::cos(basis.frequencies[j] * xs[i] + basis.phases[j]);
    }
  }
  return phi;
}

int default_n_basis(std::size_t n) {
  const int raw = static_cast<int>(std::lround(static_cast<double>(n) / 4.5));
  return std::clamp(raw, std::min(10, static_cast<int>(n)), static_cast<int>(n));
}

}  // namespace gpev
