#include "gpev/gp_exact.hpp"

#include <cmath>
#include <numbers>

#include "gpev/dpmm.hpp"

namespace gpev {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Eigen::MatrixXd noisy_kernel(std::span<const double> x, double lambda, double sigma2) {
  Eigen::MatrixXd a = se_kernel_matrix(x, x, lambda);
  a.diagonal().array() += sigma2 + kGpJitter;
  return a;
}

double log_marginal_from(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y) {
  const Eigen::VectorXd v = llt.matrixL().solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * v.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) {
    rng.uniform();
    return true;
  }
  return std::log(rng.uniform()) < log_ratio;
}

/// Exact-GP chain state with the inverse of C(X, X) + sigma2 I kept current
/// under single-covariate moves.
class ExactChain {
 public:
  ExactChain(const Dataset& data, ChainOptions options, Rng& rng)
      : options_(std::move(options)),
        y_(as_vector(data.y())),
        w_(data.w()),
        x_(data.w()) {
    options_.dpmm.validate();
    options_.gp.validate();
    if (options_.variant == Variant::GpevN) options_.dpmm.truncation = 1;
    if (options_.variant == Variant::GpFixedX) {
      throw std::invalid_argument("run_chain_gpev_f: the exact chain always samples X");
    }
    lambda_ = options_.gp.fixed_lambda ? *options_.gp.fixed_lambda
                                       : options_.gp.lambda_shape * options_.gp.lambda_scale;
    const NoiseSetting& s2 = options_.noise.sigma2;
    const NoiseSetting& d2 = options_.noise.delta2;
    sigma2_ = s2.sampled && s2.value <= 0.0 ? 0.5 * std::max(sample_variance(data.y()), 1e-6) : s2.value;
    delta2_ = d2.sampled && d2.value <= 0.0 ? 0.1 * std::max(sample_variance(data.w()), 1e-6) : d2.value;
    if (!s2.sampled) s2.validate("sigma2");
    if (!d2.sampled) d2.validate("delta2");
    dpmm_ = draw_prior_state(x_, options_.dpmm, rng);
  }

  void sweep(int t, Rng& rng) {
    refresh(t);
    dpmm_ = blocked_gibbs_update(x_, dpmm_, options_.dpmm, rng);
    step_latent_x(rng);
    step_lambda(t, rng);
    step_sigma2(t, rng);
    step_delta2(rng);
  }

  double log_posterior() const {
    double lp = log_marginal_;
    if (!options_.gp.fixed_lambda) {
      lp += (options_.gp.lambda_shape - 1.0) * std::log(lambda_) - lambda_ / options_.gp.lambda_scale;
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      lp += normal_log_density_precision(w_[i], x_[i], 1.0 / delta2_);
      lp += std::log(mixture_density(dpmm_, x_[i]));
    }
    if (options_.noise.sigma2.sampled) lp -= std::log(sigma2_);
    if (options_.noise.delta2.sampled) lp -= std::log(delta2_);
    return lp;
  }

  double log_marginal() const { return log_marginal_; }
  const std::vector<double>& x() const { return x_; }
  const DpmmState& dpmm() const { return dpmm_; }
  double lambda() const { return lambda_; }
  double sigma2() const { return sigma2_; }
  double delta2() const { return delta2_; }
  const AcceptanceStats& acceptance() const { return acceptance_; }

 private:
  void refresh(int t) {
    Eigen::LLT<Eigen::MatrixXd> llt(noisy_kernel(x_, lambda_, sigma2_));
    if (llt.info() != Eigen::Success) throw ChainAbort(t, "kernel matrix factorization failed");
    log_marginal_ = log_marginal_from(llt, y_);
    inverse_ = llt.solve(Eigen::MatrixXd::Identity(y_.size(), y_.size()));
    alpha_.noalias() = inverse_ * y_;
  }

  void step_latent_x(Rng& rng) {
    const Eigen::Index n = y_.size();
    const double diag = 1.0 + sigma2_ + kGpJitter;
    Eigen::VectorXd k(n), bk(n), col(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int h = dpmm_.labels[i];
      const Proposal q = latent_x_proposal(w_[i], dpmm_.means[h], dpmm_.precisions[h], delta2_);
      const double x_new = q.mean + std::sqrt(q.variance) * rng.normal();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = x_new - x_[j];
        k[j] = std::exp(-d * d / lambda_);
      }
      k[i] = 0.0;
      bk.noalias() = inverse_ * k;
      const double b_ii = inverse_(i, i);
      const double b_k = bk[i];
      const double a_i = alpha_[i];
      const double s_new = diag - (k.dot(bk) - b_k * b_k / b_ii);
      const double r_new = y_[i] - (k.dot(alpha_) - b_k * a_i / b_ii);
      const double s_cur = 1.0 / b_ii;
      const double r_cur = a_i / b_ii;
      bool ok = false;
      double log_ratio = 0.0;
      if (s_new > 0.0) {
        log_ratio = -0.5 * std::log(s_new / s_cur) - 0.5 * (r_new * r_new / s_new - r_cur * r_cur / s_cur);
        ok = accept(log_ratio, rng);
      } else {
        rng.uniform();
      }
      acceptance_.x.record(ok);
      if (!ok) continue;

      // Block-inverse update: drop row/column i, then re-attach it with the new kernel column.
      col = inverse_.col(i);
      const Eigen::VectorXd u = bk - col * (b_k / b_ii);
      inverse_.noalias() -= (col / b_ii) * col.transpose();
      inverse_.noalias() += (u / s_new) * u.transpose();
      inverse_.col(i) = -u / s_new;
      inverse_.row(i) = inverse_.col(i).transpose();
      inverse_(i, i) = 1.0 / s_new;
      alpha_.noalias() = inverse_ * y_;
      x_[i] = x_new;
      log_marginal_ += log_ratio;
    }
  }

  void step_lambda(int t, Rng& rng) {
    if (options_.gp.fixed_lambda) return;
    const double a0 = options_.gp.lambda_shape;
    const double b0 = options_.gp.lambda_scale;
    const double proposal = lambda_ * std::exp(options_.mcmc.log_lambda_proposal_sd * rng.normal());
    Eigen::LLT<Eigen::MatrixXd> llt(noisy_kernel(x_, proposal, sigma2_));
    if (llt.info() != Eigen::Success) throw ChainAbort(t, "kernel matrix factorization failed");
    const double lm = log_marginal_from(llt, y_);
    // Prior Ga(a0, b0) on lambda plus the log-scale Jacobian gives a0 * log(lambda).
    const double log_ratio = lm - log_marginal_ + a0 * (std::log(proposal) - std::log(lambda_)) -
                             (proposal - lambda_) / b0;
    if (accept(log_ratio, rng)) {
      lambda_ = proposal;
      log_marginal_ = lm;
    }
  }

  void step_sigma2(int t, Rng& rng) {
    if (!options_.noise.sigma2.sampled) return;
    const double proposal = sigma2_ * std::exp(options_.mcmc.log_lambda_proposal_sd * rng.normal());
    Eigen::LLT<Eigen::MatrixXd> llt(noisy_kernel(x_, lambda_, proposal));
    if (llt.info() != Eigen::Success) throw ChainAbort(t, "kernel matrix factorization failed");
    const double lm = log_marginal_from(llt, y_);
    // The 1/sigma2 prior is flat on the log scale.
    if (accept(lm - log_marginal_, rng)) {
      sigma2_ = proposal;
      log_marginal_ = lm;
    }
  }

  void step_delta2(Rng& rng) {
    if (!options_.noise.delta2.sampled) return;
    double ss = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) ss += (w_[i] - x_[i]) * (w_[i] - x_[i]);
    const GammaParams p = variance_conditional(ss, x_.size());
    delta2_ = p.scale / rng.gamma(p.shape, 1.0);
  }

  ChainOptions options_;
  Eigen::VectorXd y_;
  std::vector<double> w_;
  std::vector<double> x_;
  DpmmState dpmm_;
  double lambda_ = 1.0;
  double sigma2_ = 1.0;
  double delta2_ = 1.0;
  Eigen::MatrixXd inverse_;
  Eigen::VectorXd alpha_;
  double log_marginal_ = 0.0;
  AcceptanceStats acceptance_;
};

}  // namespace

Eigen::MatrixXd se_kernel_matrix(std::span<const double> a, std::span<const double> b, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("se_kernel_matrix: lambda must be > 0");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double d = a[i] - b[j];
      c(i, j) = std::exp(-d * d / lambda);
    }
  }
  return c;
}

GpPredictive gp_predict(std::span<const double> x_train, std::span<const double> y_train,
                        std::span<const double> x_star, double lambda, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gp_predict: sigma2 must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("gp_predict: lambda must be > 0");
  if (x_train.size() != y_train.size()) throw std::invalid_argument("gp_predict: x and y lengths differ");
  GpPredictive out;
  out.covariance = se_kernel_matrix(x_star, x_star, lambda);
  out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x_star.size()));
  if (!x_train.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(noisy_kernel(x_train, lambda, sigma2));
    if (llt.info() != Eigen::Success) throw std::runtime_error("gp_predict: factorization failed");
    const Eigen::MatrixXd cross = se_kernel_matrix(x_train, x_star, lambda);
    out.mean.noalias() = cross.transpose() * llt.solve(as_vector(y_train));
    const Eigen::MatrixXd v = llt.matrixL().solve(cross);
    out.covariance.noalias() -= v.transpose() * v;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  for (Eigen::Index i = 0; i < out.covariance.rows(); ++i) {
    out.covariance(i, i) = std::max(out.covariance(i, i), 0.0);
  }
  return out;
}

double gp_log_marginal(std::span<const double> x, std::span<const double> y, double lambda, double sigma2) {
  if (x.size() != y.size()) throw std::invalid_argument("gp_log_marginal: x and y lengths differ");
  Eigen::LLT<Eigen::MatrixXd> llt(noisy_kernel(x, lambda, sigma2));
  if (llt.info() != Eigen::Success) throw std::runtime_error("gp_log_marginal: factorization failed");
  return log_marginal_from(llt, as_vector(y));
}

std::vector<double> sample_predictive(const GpPredictive& pred, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pred.covariance);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd z(pred.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd f = pred.mean + eig.eigenvectors() * root.cwiseProduct(z);
  return {f.data(), f.data() + f.size()};
}

ChainSamples run_chain_gpev_f(const Dataset& data, const ChainOptions& options, Rng& rng) {
  options.mcmc.validate();
  ExactChain chain(data, options, rng);
  Rng f_rng = rng.split(0x66647261ULL);
  ChainSamples out;
  out.grid = options.grid;
  out.sigma2_sampled = options.noise.sigma2.sampled;
  out.delta2_sampled = options.noise.delta2.sampled;
  const McmcSettings& m = options.mcmc;
  out.draws.reserve(static_cast<std::size_t>(m.retained()));
  for (int t = 1; t <= m.iters; ++t) {
    chain.sweep(t, rng);
    if (!std::isfinite(chain.log_marginal())) throw ChainAbort(t, "non-finite log-likelihood");
    if (t <= m.burn_in || (t - m.burn_in) % m.thin != 0) continue;
    Draw d;
    d.iteration = t;
    d.sigma2 = chain.sigma2();
    d.delta2 = chain.delta2();
    d.lambda = chain.lambda();
    d.log_posterior = chain.log_posterior();
    if (!std::isfinite(d.log_posterior)) throw ChainAbort(t, "non-finite log-posterior");
    d.f = sample_predictive(gp_predict(chain.x(), data.y(), out.grid, d.lambda, d.sigma2), f_rng);
    if (options.keep_latent) d.x = chain.x();
    d.mixture = MixtureSummary{chain.dpmm().weights, chain.dpmm().means, chain.dpmm().precisions};
    d.acceptance = chain.acceptance();
    out.draws.push_back(std::move(d));
  }
  out.acceptance = chain.acceptance();
  return out;
}

ChainSamples run_gp_ignore_error(const Dataset& data, const ChainOptions& options, Rng& rng) {
  ChainOptions fixed = options;
  fixed.variant = Variant::GpFixedX;
  return run_chain(data, fixed, rng);
}

}  // namespace gpev
