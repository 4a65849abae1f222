#include "gpev/dpmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gpev {

double normal_log_density_precision(double x, double mean, double precision) {
  const double d = x - mean;
  return 0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * d * d;
}

std::vector<double> stick_to_weights(std::span<const double> sticks) {
  std::vector<double> weights(sticks.size());
  double remaining = 1.0;
  for (std::size_t h = 0; h < sticks.size(); ++h) {
    const double nu = sticks[h];
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("stick_to_weights: stick outside (0, 1]");
    weights[h] = nu * remaining;
    remaining *= 1.0 - nu;
  }
  return weights;
}

int sample_log_categorical(std::span<const double> log_mass, Rng& rng) {
  const double top = *std::max_element(log_mass.begin(), log_mass.end());
  if (!std::isfinite(top)) throw std::runtime_error("sample_log_categorical: all masses are zero");
  double total = 0.0;
  // Small fixed-size buffers dominate; avoid allocation for the common H <= 64.
  double stack_buf[64];
  std::vector<double> heap_buf;
  double* mass = stack_buf;
  if (log_mass.size() > 64) {
    heap_buf.resize(log_mass.size());
    mass = heap_buf.data();
  }
  for (std::size_t k = 0; k < log_mass.size(); ++k) {
    mass[k] = std::exp(log_mass[k] - top);
    total += mass[k];
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < log_mass.size(); ++k) {
    acc += mass[k];
    if (u < acc) return static_cast<int>(k);
  }
  // u landed on the rounding slack at the top; return the last component with mass.
  for (std::size_t k = log_mass.size(); k-- > 0;) {
    if (mass[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

std::vector<int> update_labels(std::span<const double> x, const DpmmState& state, Rng& rng) {
  const std::size_t H = state.components();
  std::vector<double> log_weight(H), log_norm(H), log_mass(H);
  for (std::size_t h = 0; h < H; ++h) {
    log_weight[h] = state.weights[h] > 0.0 ? std::log(state.weights[h])
                                           : -std::numeric_limits<double>::infinity();
    log_norm[h] = 0.5 * std::log(state.precisions[h] / (2.0 * std::numbers::pi));
  }
  std::vector<int> labels(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t h = 0; h < H; ++h) {
      const double d = x[i] - state.means[h];
      log_mass[h] = log_weight[h] + log_norm[h] - 0.5 * state.precisions[h] * d * d;
    }
    labels[i] = sample_log_categorical(log_mass, rng);
  }
  return labels;
}

Atoms update_atoms(std::span<const double> x, std::span<const int> labels, const DpmmHyper& hyper, Rng& rng) {
  const auto H = static_cast<std::size_t>(hyper.truncation);
  std::vector<double> count(H, 0.0), sum(H, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    count[labels[i]] += 1.0;
    sum[labels[i]] += x[i];
  }
  std::vector<double> ss(H, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int h = labels[i];
    const double d = x[i] - sum[h] / count[h];
    ss[h] += d * d;
  }

  // Prior: mu | tau ~ N(mu0, kappa0 / tau), tau ~ Ga(a_tau, rate b_tau).
  const double k0 = 1.0 / hyper.kappa0;
  Atoms out{std::vector<double>(H), std::vector<double>(H)};
  for (std::size_t h = 0; h < H; ++h) {
    const double n = count[h];
    double kn = k0, mn = hyper.mu0, an = hyper.a_tau, bn = hyper.b_tau;
    if (n > 0.0) {
      const double xbar = sum[h] / n;
      kn = k0 + n;
      mn = (k0 * hyper.mu0 + n * xbar) / kn;
      an = hyper.a_tau + 0.5 * n;
      const double shift = xbar - hyper.mu0;
      bn = hyper.b_tau + 0.5 * ss[h] + 0.5 * k0 * n * shift * shift / kn;
    }
    const double tau = rng.gamma(an, 1.0 / bn);
    out.precisions[h] = tau;
    out.means[h] = mn + rng.normal() / std::sqrt(kn * tau);
  }
  return out;
}

std::vector<double> update_sticks(std::span<const int> labels, double alpha, int truncation, Rng& rng) {
  const auto H = static_cast<std::size_t>(truncation);
  std::vector<double> count(H, 0.0);
  for (int s : labels) count[s] += 1.0;
  std::vector<double> sticks(H, 1.0);
  double beyond = 0.0;
  for (double c : count) beyond += c;
  for (std::size_t h = 0; h + 1 < H; ++h) {
    beyond -= count[h];
    double nu = rng.beta(1.0 + count[h], alpha + beyond);
    // A stick of exactly 0 or 1 before the last component would zero out the tail;
    // keep draws strictly inside (0, 1).
    nu = std::clamp(nu, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon());
    sticks[h] = nu;
  }
  return sticks;
}

double mixture_density(std::span<const double> weights, std::span<const double> means,
                       std::span<const double> precisions, double x) {
  double acc = 0.0;
  for (std::size_t h = 0; h < weights.size(); ++h) {
    if (weights[h] <= 0.0) continue;
    acc += weights[h] * std::exp(normal_log_density_precision(x, means[h], precisions[h]));
  }
  return acc;
}

double mixture_density(const DpmmState& state, double x) {
  return mixture_density(state.weights, state.means, state.precisions, x);
}

DpmmState draw_prior_state(std::span<const double> x, const DpmmHyper& hyper, Rng& rng) {
  DpmmState state;
  state.sticks = update_sticks({}, hyper.alpha, hyper.truncation, rng);
  state.weights = stick_to_weights(state.sticks);
  Atoms atoms = update_atoms({}, {}, hyper, rng);
  state.means = std::move(atoms.means);
  state.precisions = std::move(atoms.precisions);
  state.labels = update_labels(x, state, rng);
  return state;
}

DpmmState blocked_gibbs_update(std::span<const double> x, const DpmmState& state, const DpmmHyper& hyper,
                               Rng& rng) {
  DpmmState next;
  next.labels = update_labels(x, state, rng);
  Atoms atoms = update_atoms(x, next.labels, hyper, rng);
  next.means = std::move(atoms.means);
  next.precisions = std::move(atoms.precisions);
  next.sticks = update_sticks(next.labels, hyper.alpha, hyper.truncation, rng);
  next.weights = stick_to_weights(next.sticks);
  return next;
}

}  // namespace gpev
