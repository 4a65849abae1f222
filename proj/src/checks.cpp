#include "gpev/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "gpev/decon.hpp"
#include "gpev/rff_gp.hpp"
#include "gpev/rng.hpp"
#include "gpev/sampler.hpp"

namespace gpev {

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double inverse_gamma_cdf(double v, double shape, double scale) {
  if (v <= 0.0) return 0.0;
  return boost::math::gamma_q(shape, scale / v);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

CheckResult make(const std::string& suite, std::string name, bool ok, std::string detail) {
  return {suite, std::move(name), ok, std::move(detail)};
}

// Inverse transform of (1 - t^2)^3 on [-1, 1] without measurement error.
double smooth_kernel_reference(double u) {
  const double a = std::abs(u);
  if (a < 2.0) {
    double term = 1.0, acc = 0.0;
    for (int m = 0; m < 40; ++m) {
      const double k = 2.0 * m;
      acc += term * 48.0 / ((k + 1) * (k + 3) * (k + 5) * (k + 7));
      term *= -a * a / ((k + 1) * (k + 2));
    }
    return acc / std::numbers::pi;
  }
  const double a2 = a * a;
  return 48.0 * std::cos(a) * (1.0 - 15.0 / a2) / (std::numbers::pi * a2 * a2) -
         144.0 * std::sin(a) * (2.0 - 5.0 / a2) / (std::numbers::pi * a2 * a2 * a);
}

std::vector<CheckResult> rff_moments(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng root(opt.seed);
  const double ys[] = {0.0, 0.5, 1.0};
  for (int n_basis : {1, 5, 50}) {
    for (double lambda : {0.5, 2.0}) {
      Rng rng = root.split({static_cast<std::uint64_t>(n_basis), static_cast<std::uint64_t>(lambda * 10)});
      const int m = opt.draws;
      double sum[3] = {0, 0, 0};
      std::vector<double> fy[3];
      for (auto& v : fy) v.resize(m);
      for (int r = 0; r < m; ++r) {
        const RffBasis b = sample_basis(n_basis, lambda, rng);
        for (int k = 0; k < 3; ++k) {
          fy[k][r] = eval_surrogate(b, ys[k]);
          sum[k] += fy[k][r];
        }
      }
      const double md = m;
      const double mean0 = sum[0] / md;
      double var0 = 0.0;
      for (double v : fy[0]) var0 += (v - mean0) * (v - mean0);
      var0 /= md - 1.0;
      const double se_mean = std::sqrt(var0 / md);
      std::string tag = "N=" + std::to_string(n_basis) + " lambda=" + fmt(lambda);
      out.push_back(make("rff-moments", "mean " + tag, std::abs(mean0) <= 4.0 * se_mean,
                         "mean " + fmt(mean0) + ", 4 SE " + fmt(4.0 * se_mean)));
      for (int k = 0; k < 3; ++k) {
        const double meank = sum[k] / md;
        double c = 0.0, c2 = 0.0;
        for (int r = 0; r < m; ++r) {
          const double p = (fy[0][r] - mean0) * (fy[k][r] - meank);
          c += p;
          c2 += p * p;
        }
        const double cov = c / md;
        const double se = std::sqrt((c2 / md - cov * cov) / md);
        const double target = std::exp(-ys[k] * ys[k] / lambda);
        out.push_back(make("rff-moments", "cov(0," + fmt(ys[k]) + ") " + tag, std::abs(cov - target) <= 4.0 * se,
                           "cov " + fmt(cov) + " vs " + fmt(target) + ", 4 SE " + fmt(4.0 * se)));
      }
    }
  }
  return out;
}

std::vector<CheckResult> kernel_checks(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  double worst_sym = 0.0, worst_ref = 0.0, worst_double = 0.0;
  for (double ratio : {0.0, 0.5, 1.0}) {
    DeconKernelSpec spec;
    spec.h = 0.4;
    spec.delta = ratio * spec.h;
    const DeconKernel k(spec);
    DeconKernelSpec fine = spec;
    fine.nodes = 2 * spec.nodes - 1;
    const DeconKernel kf(fine);
    for (double u = -20.0; u <= 20.0; u += 0.25) {
      worst_sym = std::max(worst_sym, std::abs(k(u) - k(-u)));
      worst_double = std::max(worst_double, std::abs(k(u) - kf(u)));
      if (ratio == 0.0) worst_ref = std::max(worst_ref, std::abs(k(u) - smooth_kernel_reference(u)));
    }
    // Integral and L1 norm by the trapezoid rule on [-200, 200].
    const double du = 0.005;
    double integral = 0.0, l1 = 0.0;
    for (double u = -200.0; u <= 200.0 + 1e-9; u += du) {
      const double w = (u == -200.0 || u >= 200.0 - 1e-9) ? 0.5 : 1.0;
      const double v = k(u);
      integral += w * v * du;
      l1 += w * std::abs(v) * du;
    }
    out.push_back(make("kernel", "integral delta/h=" + fmt(ratio), std::abs(integral - 1.0) < 1e-3,
                       "integral " + fmt(integral)));
    const double bound = 10.0 * std::exp(spec.inflation_exponent());
    out.push_back(make("kernel", "L1 bound delta/h=" + fmt(ratio), l1 < bound,
                       "L1 " + fmt(l1) + " < " + fmt(bound)));
  }
  out.push_back(make("kernel", "symmetry", worst_sym < 1e-12, "max |K(u) - K(-u)| " + fmt(worst_sym)));
  out.push_back(make("kernel", "node doubling", worst_double < 1e-8, "max change " + fmt(worst_double)));
  out.push_back(make("kernel", "closed form at delta=0", worst_ref < 1e-10, "max error " + fmt(worst_ref)));
  (void)opt;
  return out;
}

std::vector<CheckResult> conjugacy(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng root(opt.seed);

  {  // amplitudes against a dense solve
    Dataset data({0.1, -0.4, 0.9}, {0.3, -0.2, 0.5});
    RffBasis b;
    b.amplitudes = Eigen::Vector2d(0.0, 0.0);
    b.frequencies = Eigen::Vector2d(0.7, -1.3);
    b.phases = Eigen::Vector2d(0.4, 2.0);
    b.lambda = 1.0;
    ChainOptions o;
    o.variant = Variant::GpFixedX;
    o.gp.n_basis = 2;
    o.noise = {NoiseSetting::fixed(0.25), NoiseSetting::fixed(1.0)};
    GibbsSampler s(data, o, ChainState{b, {}, data.w(), 0.25, 1.0});
    const Eigen::MatrixXd phi = design_matrix(b, data.w());
    const Eigen::Map<const Eigen::VectorXd> y(data.y().data(), 3);
    const Eigen::MatrixXd cov = (phi.transpose() * phi / 0.25 + Eigen::MatrixXd::Identity(2, 2)).inverse();
    const Eigen::VectorXd mu = cov * phi.transpose() * y / 0.25;
    Rng rng = root.split(1);
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();
    for (int r = 0; r < opt.draws; ++r) {
      s.step_amplitudes(rng);
      const Eigen::Vector2d a = s.state().basis.amplitudes;
      sum += a;
      outer += (a - mu) * (a - mu).transpose();
    }
    const double m = opt.draws;
    const Eigen::Vector2d mean = sum / m;
    const Eigen::Matrix2d emp = outer / m - (mean - mu) * (mean - mu).transpose();
    bool ok = true;
    std::string detail;
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt(cov(j, j) / m);
      ok = ok && std::abs(mean[j] - mu[j]) <= 4.0 * se;
      detail += "mean" + std::to_string(j) + " " + fmt(mean[j]) + " vs " + fmt(mu[j]) + "; ";
      for (int k = 0; k < 2; ++k) {
        const double se_c = std::sqrt((cov(j, j) * cov(k, k) + cov(j, k) * cov(j, k)) / m);
        ok = ok && std::abs(emp(j, k) - cov(j, k)) <= 4.0 * se_c;
      }
    }
    out.push_back(make("conjugacy", "amplitudes vs dense solve", ok, detail));
  }

  {  // lambda against a grid posterior
    const double w = 1.3, a0 = 5.0, b0 = 1.0;
    Dataset data({0.0, 1.0}, {0.0, 1.0});
    RffBasis b;
    b.amplitudes = Eigen::VectorXd::Zero(1);
    b.frequencies = Eigen::VectorXd::Constant(1, w);
    b.phases = Eigen::VectorXd::Zero(1);
    b.lambda = 1.0;
    ChainOptions o;
    o.variant = Variant::GpFixedX;
    o.gp.n_basis = 1;
    o.gp.lambda_shape = a0;
    o.gp.lambda_scale = b0;
    o.noise = {NoiseSetting::fixed(1.0), NoiseSetting::fixed(1.0)};
    GibbsSampler s(data, o, ChainState{b, {}, data.w(), 1.0, 1.0});
    const int cells = 20000;
    const double top = 40.0, dl = top / cells;
    std::vector<double> cdf(cells + 1, 0.0);
    for (int c = 1; c <= cells; ++c) {
      const double l = (c - 0.5) * dl;
      cdf[c] = cdf[c - 1] + std::exp((a0 - 0.5) * std::log(l) - l / b0 - l * w * w / 4.0);
    }
    for (double& v : cdf) v /= cdf.back();
    const int bins = 20;
    std::vector<double> edges{0.0};
    for (int k = 1; k < bins; ++k) {
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), static_cast<double>(k) / bins);
      edges.push_back(static_cast<double>(it - cdf.begin()) * dl);
    }
    std::vector<double> expected(bins), counts(bins, 0.0);
    for (int k = 0; k < bins; ++k) {
      const auto lo = static_cast<std::size_t>(std::lround(edges[k] / dl));
      const auto hi = k + 1 < bins ? static_cast<std::size_t>(std::lround(edges[k + 1] / dl)) : cdf.size() - 1;
      expected[k] = cdf[hi] - cdf[lo];
    }
    Rng rng = root.split(2);
    for (int r = 0; r < opt.draws; ++r) {
      s.step_lambda(rng);
      const double l = s.state().basis.lambda;
      const auto k = std::upper_bound(edges.begin(), edges.end(), l) - edges.begin() - 1;
      counts[static_cast<std::size_t>(k)] += 1.0;
    }
    double tv = 0.0;
    for (int k = 0; k < bins; ++k) tv += std::abs(counts[k] / opt.draws - expected[k]);
    tv *= 0.5;
    out.push_back(make("conjugacy", "lambda vs grid posterior", tv < 0.01, "total variation " + fmt(tv)));
  }

  {  // noise variances against their inverse-gamma laws
    Dataset data({0.2, -0.5, 1.1, 0.4, -1.0}, {0.5, -0.1, 0.8, 0.2, -0.6});
    Rng basis_rng = root.split(3);
    RffBasis b = sample_basis(3, 1.0, basis_rng);
    ChainOptions o;
    o.variant = Variant::GpevA;
    o.gp.n_basis = 3;
    o.noise = {NoiseSetting::sample(0.3), NoiseSetting::sample(0.3)};
    const std::vector<double> x{0.1, -0.3, 1.0, 0.6, -0.8};
    GibbsSampler s(data, o, ChainState{b, {}, x, 0.3, 0.3});
    const double rss = s.residual_sum_of_squares();
    double ssx = 0.0;
    for (int i = 0; i < 5; ++i) ssx += (data.w()[i] - x[i]) * (data.w()[i] - x[i]);
    Rng rng = root.split(4);
    std::vector<double> s2(opt.ks_draws), d2(opt.ks_draws);
    for (int r = 0; r < opt.ks_draws; ++r) {
      s.step_sigma2(rng);
      s.step_delta2(rng);
      s2[r] = s.state().sigma2;
      d2[r] = s.state().delta2;
    }
    const double p_s = ks_pvalue(ks_statistic(s2, [&](double v) { return inverse_gamma_cdf(v, 2.5, rss / 2); }),
                                 s2.size());
    const double p_d = ks_pvalue(ks_statistic(d2, [&](double v) { return inverse_gamma_cdf(v, 2.5, ssx / 2); }),
                                 d2.size());
    out.push_back(make("conjugacy", "sigma2 inverse-gamma KS", p_s > 0.01, "p = " + fmt(p_s)));
    out.push_back(make("conjugacy", "delta2 inverse-gamma KS", p_d > 0.01, "p = " + fmt(p_d)));
  }
  return out;
}

std::vector<CheckResult> invariance(const CheckOptions&) {
  // Latent-covariate MH kernel restricted to five states.
  const double xs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double w = 0.2, y = 0.3, sigma2 = 0.1, delta2 = 0.3, mu = 0.1, tau = 2.0;
  const Proposal q = latent_x_proposal(w, mu, tau, delta2);
  double qw[5], fit[5], pi[5], zq = 0.0, zp = 0.0;
  for (int j = 0; j < 5; ++j) {
    qw[j] = std::exp(-(xs[j] - q.mean) * (xs[j] - q.mean) / (2.0 * q.variance));
    fit[j] = std::sin(1.3 * xs[j]) + 0.2;
    zq += qw[j];
  }
  for (int j = 0; j < 5; ++j) {
    qw[j] /= zq;
    pi[j] = qw[j] * std::exp(-(y - fit[j]) * (y - fit[j]) / (2.0 * sigma2));
    zp += pi[j];
  }
  for (double& v : pi) v /= zp;
  double p[5][5];
  for (int i = 0; i < 5; ++i) {
    double off = 0.0;
    for (int j = 0; j < 5; ++j) {
      if (j == i) continue;
      p[i][j] = qw[j] * std::min(1.0, std::exp(latent_x_log_accept_ratio(y, fit[i], fit[j], sigma2)));
      off += p[i][j];
    }
    p[i][i] = 1.0 - off;
  }
  double tv = 0.0;
  for (int j = 0; j < 5; ++j) {
    double v = 0.0;
    for (int i = 0; i < 5; ++i) v += pi[i] * p[i][j];
    tv += std::abs(v - pi[j]);
  }
  tv *= 0.5;
  return {make("invariance", "latent x stationary on 5 states", tv < 1e-10, "total variation " + fmt(tv))};
}

}  // namespace

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> names{"rff-moments", "kernel", "conjugacy", "invariance"};
  return names;
}

std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options) {
  if (!suite.empty() && std::find(check_suites().begin(), check_suites().end(), suite) == check_suites().end()) {
    throw std::invalid_argument("unknown check suite '" + suite + "'");
  }
  std::vector<CheckResult> all;
  auto add = [&](const std::string& name, auto&& fn) {
    if (suite.empty() || suite == name) {
      auto r = fn(options);
      all.insert(all.end(), r.begin(), r.end());
    }
  };
  add("rff-moments", rff_moments);
  add("kernel", kernel_checks);
  add("conjugacy", conjugacy);
  add("invariance", invariance);
  return all;
}

}  // namespace gpev
