#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpev/config.hpp"
#include "gpev/core_types.hpp"
#include "gpev/dpmm.hpp"
#include "gpev/rff_gp.hpp"
#include "gpev/rng.hpp"

namespace gpev {

/// Surrogate-GP chain flavours. GpevN uses a single normal component for the
/// covariate density; GpFixedX pins X := W and never touches the mixture.
enum class Variant { GpevA, GpevN, GpFixedX };

struct ChainOptions {
  Variant variant = Variant::GpevA;
  GpHyper gp;  // n_basis must be set
  DpmmHyper dpmm;
  NoiseConfig noise;
  McmcSettings mcmc;
  std::vector<double> grid;
  /// Store X with every retained draw.
  bool keep_latent = true;
};

/// Resolves n_basis (default_n_basis when unset) and noise settings against a dataset size.
ChainOptions make_chain_options(const RunConfig& cfg, Variant variant, std::size_t n, NoiseConfig noise);

struct ChainState {
  RffBasis basis;
  DpmmState dpmm;
  std::vector<double> x;
  double sigma2 = 1.0;
  double delta2 = 1.0;
};

struct AcceptanceCounter {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  /// accepted / proposed, 0 before any proposal.
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct AcceptanceStats {
  AcceptanceCounter w, s, x;
};

struct MixtureSummary {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> precisions;
};

struct Draw {
  int iteration = 0;
  double sigma2 = 0.0;
  double delta2 = 0.0;
  double lambda = 0.0;
  double log_posterior = 0.0;
  std::vector<double> f;  // on ChainSamples::grid
  std::optional<RffBasis> basis;
  std::vector<double> x;
  std::optional<MixtureSummary> mixture;
  AcceptanceStats acceptance;  // cumulative at this draw
};

struct ChainSamples {
  std::vector<double> grid;
  std::vector<Draw> draws;
  AcceptanceStats acceptance;
  bool sigma2_sampled = false;
  bool delta2_sampled = false;

  std::size_t size() const { return draws.size(); }
  bool empty() const { return draws.empty(); }
  bool has_mixture() const { return !draws.empty() && draws.front().mixture.has_value(); }
  /// draws x grid.
  std::vector<std::vector<double>> f_draws() const;
};

class ChainAbort : public std::runtime_error {
 public:
  ChainAbort(int sweep, const std::string& what)
      : std::runtime_error("chain aborted at sweep " + std::to_string(sweep) + ": " + what), sweep_(sweep) {}
  int sweep() const { return sweep_; }

 private:
  int sweep_;
};

struct Proposal {
  double mean;
  double variance;
};

/// Prior-times-measurement conditional for X_i: N(m, v), v = 1/(1/delta2 + tau),
/// m = v (w/delta2 + mu tau).
Proposal latent_x_proposal(double w, double mu, double tau, double delta2);

/// Log MH ratio for the X_i move under latent_x_proposal: only the regression
/// likelihood survives.
double latent_x_log_accept_ratio(double y, double fit_current, double fit_proposed, double sigma2);

struct GammaParams {
  double shape;
  double scale;
};

/// Conditional for lambda given frequencies: Ga(a0 + N/2, b0 / (1 + b0 sum w^2 / 4)),
/// or shape a0 when literal_lambda_shape is set.
GammaParams lambda_conditional(const Eigen::VectorXd& frequencies, const GpHyper& hyper);

/// Inverse-gamma(shape, scale) for a variance under the 1/v prior: (n/2, max(ss, 1e-12)/2).
GammaParams variance_conditional(double sum_of_squares, std::size_t n);

/// Metropolis-within-Gibbs sampler for the surrogate model.
///
/// Keeps the design matrix and fitted values cached so single-coordinate moves
/// cost O(n) (frequencies, phases) or O(N) (latent covariates).
class GibbsSampler {
 public:
  /// Draws a starting state: X = W, lambda at its prior mean, basis and mixture from the prior.
  GibbsSampler(const Dataset& data, ChainOptions options, Rng& rng);
  GibbsSampler(const Dataset& data, ChainOptions options, ChainState initial);

  /// Steps in order: w, s, a, mixture, x, lambda, sigma2, delta2.
  void sweep(Rng& rng);

  void step_frequencies(Rng& rng);
  void step_phases(Rng& rng);
  void step_amplitudes(Rng& rng);
  void step_mixture(Rng& rng);
  void step_latent_x(Rng& rng);
  void step_lambda(Rng& rng);
  void step_sigma2(Rng& rng);
  void step_delta2(Rng& rng);

  const ChainState& state() const { return state_; }
  const ChainOptions& options() const { return options_; }
  const AcceptanceStats& acceptance() const { return acceptance_; }
  const Eigen::VectorXd& fitted() const { return fit_; }
  const Eigen::MatrixXd& design() const { return phi_; }

  double residual_sum_of_squares() const;
  double log_likelihood() const;
  /// Unnormalized log joint posterior of the current state.
  double log_posterior() const;

 private:
  void rebuild_cache();
  bool latent_fixed() const { return options_.variant == Variant::GpFixedX; }

  ChainOptions options_;
  Eigen::VectorXd y_;
  Eigen::VectorXd w_;
  ChainState state_;
  Eigen::MatrixXd phi_;
  Eigen::VectorXd fit_;
  Eigen::VectorXd scratch_;
  AcceptanceStats acceptance_;
};

ChainSamples run_chain(const Dataset& data, const ChainOptions& options, Rng& rng);

}  // namespace gpev
