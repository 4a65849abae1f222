#pragma once

#include <span>
#include <vector>

#include "gpev/core_types.hpp"
#include "gpev/rng.hpp"

namespace gpev {

/// Truncated stick-breaking Gaussian mixture. Labels are 0-based component indices.
struct DpmmState {
  std::vector<double> sticks;   // nu_h, last fixed at 1
  std::vector<double> weights;  // pi_h
  std::vector<double> means;    // mu_h
  std::vector<double> precisions;  // tau_h
  std::vector<int> labels;      // S_i

  std::size_t components() const { return weights.size(); }
};

/// pi_h = nu_h * prod_{l<h} (1 - nu_l). Sticks must lie in (0, 1].
std::vector<double> stick_to_weights(std::span<const double> sticks);

/// Draws an index with probability proportional to exp(log_mass[k]).
/// Max-subtracted, so adding a constant to every entry leaves the draw unchanged.
int sample_log_categorical(std::span<const double> log_mass, Rng& rng);

/// S_i ~ Categorical(pi_h N(x_i; mu_h, 1/tau_h)).
std::vector<int> update_labels(std::span<const double> x, const DpmmState& state, Rng& rng);

struct Atoms {
  std::vector<double> means;
  std::vector<double> precisions;
};

/// Normal-gamma conjugate draw per component; empty components are drawn from the prior.
Atoms update_atoms(std::span<const double> x, std::span<const int> labels, const DpmmHyper& hyper, Rng& rng);

/// nu_h ~ Beta(1 + n_h, alpha + sum_{l>h} n_l) for h < H, nu_H = 1.
std::vector<double> update_sticks(std::span<const int> labels, double alpha, int truncation, Rng& rng);

/// Sum_h pi_h N(x; mu_h, 1/tau_h).
double mixture_density(const DpmmState& state, double x);
double mixture_density(std::span<const double> weights, std::span<const double> means,
                       std::span<const double> precisions, double x);

/// Sticks and atoms from the prior, labels drawn given x (empty x gives empty labels).
DpmmState draw_prior_state(std::span<const double> x, const DpmmHyper& hyper, Rng& rng);

/// One blocked-Gibbs pass: labels, then atoms, then sticks.
DpmmState blocked_gibbs_update(std::span<const double> x, const DpmmState& state, const DpmmHyper& hyper,
                               Rng& rng);

/// log N(x; mean, 1/precision).
double normal_log_density_precision(double x, double mean, double precision);

}  // namespace gpev
