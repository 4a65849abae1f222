#include "gpev/sampler.hpp"

#include <cmath>
#include <numbers>

namespace gpev {

namespace {

constexpr double kVarianceFloor = 1e-12;

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
    rng.uniform();  // keep stream consumption independent of the outcome
    return true;
  }
  return std::log(rng.uniform()) < log_ratio;
}

}  // namespace

ChainOptions make_chain_options(const RunConfig& cfg, Variant variant, std::size_t n, NoiseConfig noise) {
  ChainOptions opt;
  opt.variant = variant;
  opt.gp = cfg.gp;
  if (!opt.gp.n_basis) opt.gp.n_basis = default_n_basis(n);
  opt.dpmm = cfg.dpmm;
  opt.noise = noise;
  opt.mcmc = cfg.mcmc;
  opt.grid = cfg.grid.points();
  return opt;
}

std::vector<std::vector<double>> ChainSamples::f_draws() const {
  std::vector<std::vector<double>> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.f);
  return out;
}

Proposal latent_x_proposal(double w, double mu, double tau, double delta2) {
  const double v = 1.0 / (1.0 / delta2 + tau);
  return {v * (w / delta2 + mu * tau), v};
}

double latent_x_log_accept_ratio(double y, double fit_current, double fit_proposed, double sigma2) {
  const double r_old = y - fit_current;
  const double r_new = y - fit_proposed;
  return -(r_new * r_new - r_old * r_old) / (2.0 * sigma2);
}

GammaParams lambda_conditional(const Eigen::VectorXd& frequencies, const GpHyper& hyper) {
  const double ss = frequencies.squaredNorm();
  const double shape =
      hyper.literal_lambda_shape ? hyper.lambda_shape : hyper.lambda_shape + 0.5 * static_cast<double>(frequencies.size());
  const double scale = hyper.lambda_scale / (1.0 + hyper.lambda_scale * ss / 4.0);
  return {shape, scale};
}

GammaParams variance_conditional(double sum_of_squares, std::size_t n) {
  return {0.5 * static_cast<double>(n), 0.5 * std::max(sum_of_squares, kVarianceFloor)};
}

GibbsSampler::GibbsSampler(const Dataset& data, ChainOptions options, Rng& rng)
    : options_(std::move(options)),
      y_(Eigen::Map<const Eigen::VectorXd>(data.y().data(), static_cast<Eigen::Index>(data.size()))),
      w_(Eigen::Map<const Eigen::VectorXd>(data.w().data(), static_cast<Eigen::Index>(data.size()))) {
  if (!options_.gp.n_basis) throw std::invalid_argument("GibbsSampler: n_basis must be resolved");
  options_.gp.validate();
  options_.dpmm.validate();
  if (options_.variant == Variant::GpevN) options_.dpmm.truncation = 1;

  state_.x = data.w();
  const double lambda =
      options_.gp.fixed_lambda ? *options_.gp.fixed_lambda : options_.gp.lambda_shape * options_.gp.lambda_scale;
  state_.basis = sample_basis(*options_.gp.n_basis, lambda, rng);
  if (!latent_fixed()) state_.dpmm = draw_prior_state(state_.x, options_.dpmm, rng);

  const NoiseSetting& s2 = options_.noise.sigma2;
  const NoiseSetting& d2 = options_.noise.delta2;
  state_.sigma2 = s2.sampled && s2.value <= 0.0 ? 0.5 * std::max(sample_variance(data.y()), 1e-6) : s2.value;
  state_.delta2 = d2.sampled && d2.value <= 0.0 ? 0.1 * std::max(sample_variance(data.w()), 1e-6) : d2.value;
  if (!s2.sampled) s2.validate("sigma2");
  if (!d2.sampled && !latent_fixed()) d2.validate("delta2");

  rebuild_cache();
  step_amplitudes(rng);
}

GibbsSampler::GibbsSampler(const Dataset& data, ChainOptions options, ChainState initial)
    : options_(std::move(options)),
      y_(Eigen::Map<const Eigen::VectorXd>(data.y().data(), static_cast<Eigen::Index>(data.size()))),
      w_(Eigen::Map<const Eigen::VectorXd>(data.w().data(), static_cast<Eigen::Index>(data.size()))),
      state_(std::move(initial)) {
  if (options_.variant == Variant::GpevN) options_.dpmm.truncation = 1;
  if (!options_.gp.n_basis) options_.gp.n_basis = static_cast<int>(state_.basis.size());
  if (state_.x.size() != data.size()) throw std::invalid_argument("GibbsSampler: x length differs from data");
  state_.basis.validate();
  if (!(state_.sigma2 > 0.0) || !(state_.delta2 > 0.0)) {
    throw std::invalid_argument("GibbsSampler: sigma2 and delta2 must be > 0");
  }
  rebuild_cache();
}

void GibbsSampler::rebuild_cache() {
  phi_ = design_matrix(state_.basis, state_.x);
  fit_ = phi_ * state_.basis.amplitudes;
  scratch_.resize(y_.size());
}

double GibbsSampler::residual_sum_of_squares() const { return (y_ - fit_).squaredNorm(); }

double GibbsSampler::log_likelihood() const {
  const double n = static_cast<double>(y_.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * state_.sigma2) -
         residual_sum_of_squares() / (2.0 * state_.sigma2);
}

double GibbsSampler::log_posterior() const {
  double lp = log_likelihood();
  const RffBasis& b = state_.basis;
  lp += -0.5 * b.amplitudes.squaredNorm();
  const double lambda = b.lambda;
  lp += 0.5 * static_cast<double>(b.size()) * std::log(lambda / (4.0 * std::numbers::pi)) -
        lambda * b.frequencies.squaredNorm() / 4.0;
  if (!options_.gp.fixed_lambda) {
    lp += (options_.gp.lambda_shape - 1.0) * std::log(lambda) - lambda / options_.gp.lambda_scale;
  }
  if (!latent_fixed()) {
    const double d2 = state_.delta2;
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      const double x = state_.x[i];
      lp += normal_log_density_precision(w_[i], x, 1.0 / d2);
      lp += std::log(mixture_density(state_.dpmm, x));
    }
    if (options_.noise.delta2.sampled) lp -= std::log(d2);
  }
  if (options_.noise.sigma2.sampled) lp -= std::log(state_.sigma2);
  return lp;
}

void GibbsSampler::step_frequencies(Rng& rng) {
  RffBasis& b = state_.basis;
  const double c = b.scale();
  const double sd = options_.mcmc.w_proposal_sd;
  const double inv2s2 = 1.0 / (2.0 * state_.sigma2);
  const Eigen::Index n = y_.size();
  for (Eigen::Index j = 0; j < b.amplitudes.size(); ++j) {
    const double w_old = b.frequencies[j];
    const double w_new = w_old + sd * rng.normal();
    const double a = b.amplitudes[j];
    const double s = b.phases[j];
    double delta_rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double col = c * std::cos(w_new * state_.x[i] + s);
      scratch_[i] = col;
      const double r_old = y_[i] - fit_[i];
      const double r_new = r_old - a * (col - phi_(i, j));
      delta_rss += r_new * r_new - r_old * r_old;
    }
    const double log_ratio = -delta_rss * inv2s2 - (w_new * w_new - w_old * w_old) * b.lambda / 4.0;
    const bool ok = accept(log_ratio, rng);
    acceptance_.w.record(ok);
    if (ok) {
      b.frequencies[j] = w_new;
      fit_ += a * (scratch_ - phi_.col(j));
      phi_.col(j) = scratch_;
    }
  }
}

void GibbsSampler::step_phases(Rng& rng) {
  RffBasis& b = state_.basis;
  const double c = b.scale();
  const double inv2s2 = 1.0 / (2.0 * state_.sigma2);
  const Eigen::Index n = y_.size();
  for (Eigen::Index j = 0; j < b.amplitudes.size(); ++j) {
    const double s_new = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double a = b.amplitudes[j];
    const double w = b.frequencies[j];
    double delta_rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double col = c * std::cos(w * state_.x[i] + s_new);
      scratch_[i] = col;
      const double r_old = y_[i] - fit_[i];
      const double r_new = r_old - a * (col - phi_(i, j));
      delta_rss += r_new * r_new - r_old * r_old;
    }
    const bool ok = accept(-delta_rss * inv2s2, rng);
    acceptance_.s.record(ok);
    if (ok) {
      b.phases[j] = s_new;
      fit_ += a * (scratch_ - phi_.col(j));
      phi_.col(j) = scratch_;
    }
  }
}

void GibbsSampler::step_amplitudes(Rng& rng) {
  const Eigen::Index N = phi_.cols();
  const double inv_s2 = 1.0 / state_.sigma2;
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(N, N);
  precision.selfadjointView<Eigen::Lower>().rankUpdate(phi_.transpose(), inv_s2);
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("step_amplitudes: posterior precision is not positive definite");
  }
  const Eigen::VectorXd mean = llt.solve(phi_.transpose() * y_ * inv_s2);
  Eigen::VectorXd z(N);
  for (Eigen::Index j = 0; j < N; ++j) z[j] = rng.normal();
  state_.basis.amplitudes = mean + llt.matrixU().solve(z);
  fit_.noalias() = phi_ * state_.basis.amplitudes;
}

void GibbsSampler::step_mixture(Rng& rng) {
  if (latent_fixed()) return;
  state_.dpmm = blocked_gibbs_update(state_.x, state_.dpmm, options_.dpmm, rng);
}

void GibbsSampler::step_latent_x(Rng& rng) {
  if (latent_fixed()) return;
  const RffBasis& b = state_.basis;
  const Eigen::Index N = b.amplitudes.size();
  const double c = b.scale();
  Eigen::VectorXd row(N);
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    const int h = state_.dpmm.labels[i];
    const Proposal q = latent_x_proposal(w_[i], state_.dpmm.means[h], state_.dpmm.precisions[h], state_.delta2);
    const double x_new = q.mean + std::sqrt(q.variance) * rng.normal();
    double f_new = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      row[j] = c * std::cos(b.frequencies[j] * x_new + b.phases[j]);
      f_new += b.amplitudes[j] * row[j];
    }
    const bool ok = accept(latent_x_log_accept_ratio(y_[i], fit_[i], f_new, state_.sigma2), rng);
    acceptance_.x.record(ok);
    if (ok) {
      state_.x[i] = x_new;
      phi_.row(i) = row.transpose();
      fit_[i] = f_new;
    }
  }
}

void GibbsSampler::step_lambda(Rng& rng) {
  if (options_.gp.fixed_lambda) return;
  const GammaParams p = lambda_conditional(state_.basis.frequencies, options_.gp);
  state_.basis.lambda = rng.gamma(p.shape, p.scale);
}

void GibbsSampler::step_sigma2(Rng& rng) {
  if (!options_.noise.sigma2.sampled) return;
  const GammaParams p = variance_conditional(residual_sum_of_squares(), static_cast<std::size_t>(y_.size()));
  state_.sigma2 = p.scale / rng.gamma(p.shape, 1.0);
}

void GibbsSampler::step_delta2(Rng& rng) {
  if (!options_.noise.delta2.sampled || latent_fixed()) return;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    const double d = w_[i] - state_.x[i];
    ss += d * d;
  }
  const GammaParams p = variance_conditional(ss, static_cast<std::size_t>(w_.size()));
  state_.delta2 = p.scale / rng.gamma(p.shape, 1.0);
}

void GibbsSampler::sweep(Rng& rng) {
  step_frequencies(rng);
  step_phases(rng);
  step_amplitudes(rng);
  step_mixture(rng);
  step_latent_x(rng);
  step_lambda(rng);
  step_sigma2(rng);
  step_delta2(rng);
}

ChainSamples run_chain(const Dataset& data, const ChainOptions& options, Rng& rng) {
  options.mcmc.validate();
  GibbsSampler sampler(data, options, rng);
  ChainSamples out;
  out.grid = options.grid;
  out.sigma2_sampled = options.noise.sigma2.sampled;
  out.delta2_sampled = options.noise.delta2.sampled && options.variant != Variant::GpFixedX;
  out.draws.reserve(static_cast<std::size_t>(options.mcmc.retained()));

  const McmcSettings& m = options.mcmc;
  for (int t = 1; t <= m.iters; ++t) {
    sampler.sweep(rng);
    const double ll = sampler.log_likelihood();
    if (!std::isfinite(ll)) throw ChainAbort(t, "non-finite log-likelihood");
    if (t <= m.burn_in || (t - m.burn_in) % m.thin != 0) continue;

    const ChainState& st = sampler.state();
    Draw d;
    d.iteration = t;
    d.sigma2 = st.sigma2;
    d.delta2 = st.delta2;
    d.lambda = st.basis.lambda;
    d.log_posterior = sampler.log_posterior();
    if (!std::isfinite(d.log_posterior)) throw ChainAbort(t, "non-finite log-posterior");
    const Eigen::VectorXd f = design_matrix(st.basis, out.grid) * st.basis.amplitudes;
    d.f.assign(f.data(), f.data() + f.size());
    d.basis = st.basis;
    if (options.keep_latent) d.x = st.x;
    if (options.variant != Variant::GpFixedX) {
      d.mixture = MixtureSummary{st.dpmm.weights, st.dpmm.means, st.dpmm.precisions};
    }
    d.acceptance = sampler.acceptance();
    out.draws.push_back(std::move(d));
  }
  out.acceptance = sampler.acceptance();
  return out;
}

}  // namespace gpev
