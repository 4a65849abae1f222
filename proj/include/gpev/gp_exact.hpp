#pragma once

#include <span>

#include <Eigen/Dense>

#include "gpev/core_types.hpp"
#include "gpev/rng.hpp"
#include "gpev/sampler.hpp"

namespace gpev {

/// Added to kernel diagonals before every factorization.
inline constexpr double kGpJitter = 1e-8;

struct GpPredictive {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// C(i, j) = exp(-(a_i - b_j)^2 / lambda).
Eigen::MatrixXd se_kernel_matrix(std::span<const double> a, std::span<const double> b, double lambda);

/// Latent-f predictive at x_star given noisy training data. Diagonal entries
/// that round below zero are clamped.
GpPredictive gp_predict(std::span<const double> x_train, std::span<const double> y_train,
                        std::span<const double> x_star, double lambda, double sigma2);

/// log N(y; 0, C(x, x) + sigma2 I).
double gp_log_marginal(std::span<const double> x, std::span<const double> y, double lambda, double sigma2);

/// One draw from N(mean, covariance) using a clamped eigen-decomposition, so
/// numerically singular predictive covariances are fine.
std::vector<double> sample_predictive(const GpPredictive& pred, Rng& rng);

/// Full-scale GP with measurement error: f is integrated out, X moves use the
/// marginal likelihood, lambda moves are random-walk MH on log(lambda).
/// `options.variant` selects the covariate prior (GpevA mixture, GpevN single normal).
ChainSamples run_chain_gpev_f(const Dataset& data, const ChainOptions& options, Rng& rng);

/// Surrogate GP that takes W at face value (X := W).
ChainSamples run_gp_ignore_error(const Dataset& data, const ChainOptions& options, Rng& rng);

}  // namespace gpev
