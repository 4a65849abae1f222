#include "gpev/decon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gpev {

void DeconKernelSpec::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("DeconKernelSpec: h must be > 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("DeconKernelSpec: delta must be ≥ 0");
  if (nodes < 5 || (nodes - 1) % 4 != 0) {
    throw std::invalid_argument("DeconKernelSpec: nodes must be ≥ 5 and equal 1 mod 4");
  }
  if (inflation_exponent() > kMaxInflationExponent) {
    throw std::domain_error("deconvoluting kernel overflow: delta^2/(2h^2) = " +
                            std::to_string(inflation_exponent()) + " exceeds " +
                            std::to_string(kMaxInflationExponent) + "; use a larger bandwidth");
  }
}

double fourier_kernel(FourierKernel kind, double t) {
  if (std::abs(t) > 1.0) return 0.0;
  if (kind == FourierKernel::Flat) return 1.0;
  const double v = 1.0 - t * t;
  return v * v * v;
}

DeconKernel::DeconKernel(const DeconKernelSpec& spec) : spec_(spec) {
  spec_.validate();
  // Even integrand: (1/2pi) int_{-1}^{1} = (1/pi) int_0^1, composite Simpson on m intervals.
  const int m = (spec_.nodes - 1) / 2;
  step_ = 1.0 / m;
  const double c = spec_.inflation_exponent();
  weights_.resize(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    const double t = k * step_;
    const double simpson = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    weights_[k] = simpson * step_ / 3.0 / std::numbers::pi * fourier_kernel(spec_.kernel, t) * std::exp(c * t * t);
  }
}

double DeconKernel::operator()(double u) const {
  // cos(k * theta) by the Chebyshev recurrence.
  const double theta = step_ * u;
  const double two_cos = 2.0 * std::cos(theta);
  double prev = std::cos(theta);  // cos(-theta)
  double cur = 1.0;
  double acc = weights_[0];
  for (std::size_t k = 1; k < weights_.size(); ++k) {
    const double next = two_cos * cur - prev;
    prev = cur;
    cur = next;
    acc += weights_[k] * cur;
  }
  return acc;
}

double decon_kernel(double u, const DeconKernelSpec& spec) { return DeconKernel(spec)(u); }

namespace {

struct Sums {
  std::vector<double> p;
  std::vector<double> py;
};

Sums kernel_sums(const DeconKernel& kernel, std::span<const double> w, std::span<const double> y,
                 std::span<const double> grid) {
  const double h = kernel.spec().h;
  const double norm = 1.0 / (static_cast<double>(w.size()) * h);
  Sums s{std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double p = 0.0, py = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double k = kernel((grid[g] - w[i]) / h);
      p += k;
      if (!y.empty()) py += k * y[i];
    }
    s.p[g] = p * norm;
    s.py[g] = py * norm;
  }
  return s;
}

void ratio(DeconEstimate& est, const std::vector<double>& py) {
  const double top = est.p_hat.empty() ? 0.0 : *std::max_element(est.p_hat.begin(), est.p_hat.end());
  const double floor = kDenominatorFloor * top;
  est.f_hat.resize(est.grid.size());
  est.clipped.assign(est.grid.size(), 0);
  for (std::size_t g = 0; g < est.grid.size(); ++g) {
    double denom = est.p_hat[g];
    if (denom < floor) {
      denom = floor;
      est.clipped[g] = 1;
    }
    est.f_hat[g] = py[g] / denom;
  }
}

}  // namespace

DeconEstimate decon_density(const Dataset& data, const DeconKernelSpec& spec, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("decon_density: empty grid");
  const DeconKernel kernel(spec);
  Sums s = kernel_sums(kernel, data.w(), {}, grid);
  DeconEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.p_hat = std::move(s.p);
  est.f_hat.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  est.clipped.assign(grid.size(), 0);
  est.h = spec.h;
  return est;
}

DeconEstimate decon_regression(const Dataset& data, const DeconKernelSpec& spec, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("decon_regression: empty grid");
  const DeconKernel kernel(spec);
  Sums s = kernel_sums(kernel, data.w(), data.y(), grid);
  DeconEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.p_hat = std::move(s.p);
  est.h = spec.h;
  ratio(est, s.py);
  return est;
}

BandwidthTrace select_bandwidth_trace(const Dataset& data, const DeconKernelSpec& base,
                                      std::span<const double> candidates, int folds, Rng& rng) {
  if (candidates.size() < 2) throw std::invalid_argument("select_bandwidth: need at least 2 candidates");
  const std::size_t n = data.size();
  if (folds < 2 || static_cast<std::size_t>(folds) > n) {
    throw std::invalid_argument("select_bandwidth: folds must be in [2, n]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<int> fold_of(n);
  for (std::size_t r = 0; r < n; ++r) fold_of[order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));

  struct Split {
    std::vector<double> train_w, train_y, test_w, test_y;
  };
  std::vector<Split> splits(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f) {
      Split& s = splits[f];
      if (fold_of[i] == f) {
        s.test_w.push_back(data.w()[i]);
        s.test_y.push_back(data.y()[i]);
      } else {
        s.train_w.push_back(data.w()[i]);
        s.train_y.push_back(data.y()[i]);
      }
    }
  }

  BandwidthTrace trace;
  trace.candidates.assign(candidates.begin(), candidates.end());
  trace.cv_error.assign(candidates.size(), std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    DeconKernelSpec spec = base;
    spec.h = candidates[c];
    if (!(spec.h > 0.0) || spec.inflation_exponent() > kMaxInflationExponent) continue;
    any = true;
    const DeconKernel kernel(spec);
    double sse = 0.0;
    for (const Split& s : splits) {
      DeconEstimate est;
      est.grid = s.test_w;
      Sums sums = kernel_sums(kernel, s.train_w, s.train_y, s.test_w);
      est.p_hat = std::move(sums.p);
      ratio(est, sums.py);
      for (std::size_t i = 0; i < s.test_y.size(); ++i) {
        const double r = s.test_y[i] - est.f_hat[i];
        sse += r * r;
      }
    }
    const double err = sse / static_cast<double>(n);
    if (std::isfinite(err)) trace.cv_error[c] = err;
  }
  if (!any) throw std::domain_error("select_bandwidth: every candidate bandwidth triggers the overflow guard");

  std::size_t best = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!std::isfinite(trace.cv_error[c])) continue;
    if (best == candidates.size() || trace.cv_error[c] < trace.cv_error[best] ||
        (trace.cv_error[c] == trace.cv_error[best] && candidates[c] > candidates[best])) {
      best = c;
    }
  }
  if (best == candidates.size()) {
    // Nothing finite: fall back to the largest admissible bandwidth.
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      DeconKernelSpec spec = base;
      spec.h = candidates[c];
      if (spec.inflation_exponent() > kMaxInflationExponent) continue;
      if (best == candidates.size() || candidates[c] > candidates[best]) best = c;
    }
  }
  trace.selected = candidates[best];
  return trace;
}

double select_bandwidth(const Dataset& data, const DeconKernelSpec& base, std::span<const double> candidates,
                        int folds, Rng& rng) {
  return select_bandwidth_trace(data, base, candidates, folds, rng).selected;
}

std::vector<double> default_bandwidths(double delta) {
  std::vector<double> out;
  constexpr int kSteps = 24;
  const double lo = 0.05, hi = 2.0;
  for (int k = 0; k < kSteps; ++k) {
    const double h = lo * std::pow(hi / lo, static_cast<double>(k) / (kSteps - 1));
    if (delta * delta / (2.0 * h * h) <= kMaxInflationExponent) out.push_back(h);
  }
  return out;
}

}  // namespace gpev
