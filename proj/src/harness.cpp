#include "gpev/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "gpev/gp_exact.hpp"

namespace gpev {

double true_function(FunctionId f, double x) {
  switch (f) {
    case FunctionId::F1: {
      const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      return std::sin(std::numbers::pi * x / 2.0) / (1.0 + 2.0 * x * x * (sign + 1.0));
    }
    case FunctionId::F2:
      return (x + x * x) / 4.0;
  }
  throw std::invalid_argument("true_function: unknown function");
}

void SyntheticSpec::validate() const {
  if (n < 2) throw std::invalid_argument("SyntheticSpec: n must be ≥ 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("SyntheticSpec: sigma must be ≥ 0");
  if (!(delta2 >= 0.0)) throw std::invalid_argument("SyntheticSpec: delta2 must be ≥ 0");
  if (x_law == XLaw::Custom && !custom_x) throw std::invalid_argument("SyntheticSpec: custom law needs a sampler");
}

SyntheticData generate(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> x(spec.n), w(spec.n), y(spec.n);
  const double delta = std::sqrt(spec.delta2);
  for (std::size_t i = 0; i < spec.n; ++i) {
    x[i] = spec.x_law == XLaw::Uniform ? rng.uniform(-3.0, 3.0) : spec.custom_x(rng);
    y[i] = true_function(spec.function, x[i]) + spec.sigma * rng.normal();
    w[i] = x[i] + delta * rng.normal();
  }
  return {Dataset(std::move(w), std::move(y)), std::move(x), spec.function};
}

int simulation_n_basis(std::size_t n) { return n == 500 ? 80 : default_n_basis(n); }

NoiseConfig simulation_noise(const RunConfig& cfg, double sigma, double delta2) {
  NoiseConfig noise;
  noise.sigma2 = cfg.sigma2 ? *cfg.sigma2 : NoiseSetting::fixed(std::max(sigma * sigma, kMinChainDelta2));
  noise.delta2 = cfg.delta2 ? *cfg.delta2 : NoiseSetting::fixed(std::max(delta2, kMinChainDelta2));
  return noise;
}

MethodFit fit_method(Method method, const Dataset& data, const RunConfig& cfg, const NoiseConfig& noise,
                     double true_delta2, Rng& rng) {
  const auto start = std::chrono::steady_clock::now();
  MethodFit out;
  out.method = method;
  out.grid = cfg.grid.points();
  if (method == Method::Decon) {
    DeconKernelSpec spec;
    spec.kernel = cfg.decon.kernel;
    spec.nodes = cfg.decon.nodes;
    spec.delta = std::sqrt(true_delta2);
    const std::vector<double> candidates =
        cfg.decon.bandwidths.empty() ? default_bandwidths(spec.delta) : cfg.decon.bandwidths;
    spec.h = select_bandwidth(data, spec, candidates, cfg.decon.cv_folds, rng);
    out.decon = decon_regression(data, spec, out.grid);
    out.f_hat = out.decon->f_hat;
  } else {
    RunConfig local = cfg;
    if (!local.gp.n_basis) local.gp.n_basis = simulation_n_basis(data.size());
    const Variant variant = method == Method::GpevN ? Variant::GpevN
                            : method == Method::Gp  ? Variant::GpFixedX
                                                    : Variant::GpevA;
    ChainOptions options = make_chain_options(local, variant, data.size(), noise);
    options.keep_latent = false;
    ChainSamples samples = method == Method::GpevF ? run_chain_gpev_f(data, options, rng)
                           : method == Method::Gp  ? run_gp_ignore_error(data, options, rng)
                                                   : run_chain(data, options, rng);
    if (samples.empty()) throw std::runtime_error("no retained draws: iters must exceed burn_in");
    const DrawMatrix draws = samples.f_draws();
    out.f_hat = posterior_mean(draws);
    if (draws.size() >= kMinDrawsForIntervals) {
      out.summary = summarize(draws, out.grid, cfg.level);
      if (samples.has_mixture()) out.summary->density = covariate_density_summary(samples, out.grid);
    }
    out.samples = std::move(samples);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<TraceRow> trace_rows(const ChainSamples& samples) {
  std::vector<TraceRow> rows;
  rows.reserve(samples.size());
  for (const Draw& d : samples.draws) {
    rows.push_back({d.iteration, d.sigma2, d.delta2, d.lambda, d.acceptance.w.rate(), d.acceptance.s.rate(),
                    d.acceptance.x.rate(), d.log_posterior});
  }
  return rows;
}

std::vector<double> ExperimentResult::amse_values(Method m, std::size_t setting) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.method == m && r.setting == setting) out.push_back(r.amse);
  }
  return out;
}

double ExperimentResult::mean_amse(Method m, std::size_t setting) const {
  const std::vector<double> v = amse_values(m, setting);
  if (v.empty()) throw std::out_of_range("mean_amse: no records for this cell");
  double acc = 0.0;
  for (double a : v) acc += a;
  return acc / static_cast<double>(v.size());
}

double ExperimentResult::sd_amse(Method m, std::size_t setting) const {
  const std::vector<double> v = amse_values(m, setting);
  const double mean = mean_amse(m, setting);
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

ExperimentError::ExperimentError(Method method, int replicate, double delta2, const std::string& what)
    : std::runtime_error("method " + std::string(method_name(method)) + ", replicate " + std::to_string(replicate) +
                         ", delta2 " + std::to_string(delta2) + ": " + what),
      method_(method),
      replicate_(replicate) {}

namespace {

constexpr std::uint64_t kDataStream = 0x64617461ULL;
constexpr std::uint64_t kFitStream = 0x66697473ULL;

struct Job {
  std::size_t setting;
  int replicate;
  Method method;
};

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, int jobs,
                                const std::function<void(const ReplicateRecord&)>& progress) {
  if (cfg.sim.replicates < 1) throw ConfigError("replicates", "replicates must be ≥ 1");
  if (cfg.methods.empty()) throw ConfigError("methods", "at least one method is required");
  ExperimentResult result;
  result.delta2_grid = cfg.sim.delta2_grid;
  result.methods = cfg.methods;
  result.replicates = cfg.sim.replicates;
  result.function = cfg.sim.function;

  std::vector<Job> work;
  for (std::size_t s = 0; s < cfg.sim.delta2_grid.size(); ++s) {
    for (int r = 0; r < cfg.sim.replicates; ++r) {
      for (Method m : cfg.methods) work.push_back({s, r, m});
    }
  }
  result.records.resize(work.size());
  std::vector<std::optional<MethodFit>> kept(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  const Rng root(cfg.seed);
  const std::vector<double> grid = cfg.grid.points();
  const auto truth = [f = cfg.sim.function](double x) { return true_function(f, x); };

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < work.size(); j = next++) {
      const Job& job = work[j];
      const double d2 = cfg.sim.delta2_grid[job.setting];
      try {
        SyntheticSpec spec;
        spec.n = static_cast<std::size_t>(cfg.sim.n);
        spec.function = cfg.sim.function;
        spec.sigma = cfg.sim.sigma;
        spec.delta2 = d2;
        Rng data_rng = root.split({kDataStream, job.setting, static_cast<std::uint64_t>(job.replicate)});
        const SyntheticData synth = generate(spec, data_rng);
        Rng fit_rng = root.split({kFitStream, job.setting, static_cast<std::uint64_t>(job.replicate),
                                  static_cast<std::uint64_t>(job.method)});
        MethodFit fit =
            fit_method(job.method, synth.data, cfg, simulation_noise(cfg, cfg.sim.sigma, d2), d2, fit_rng);
        ReplicateRecord& rec = result.records[j];
        rec.method = job.method;
        rec.setting = job.setting;
        rec.delta2 = d2;
        rec.replicate = job.replicate;
        rec.amse = amse(fit.f_hat, truth, grid);
        rec.seconds = fit.seconds;
        if (fit.samples) {
          rec.acceptance = fit.samples->acceptance;
          rec.trace = trace_rows(*fit.samples);
          rec.delta2_sampled = fit.samples->delta2_sampled;
          fit.samples->draws.clear();
          fit.samples->draws.shrink_to_fit();
        }
        if (job.replicate == 0) kept[j] = std::move(fit);
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(rec);
        }
      } catch (const std::exception& e) {
        errors[j] = std::make_exception_ptr(ExperimentError(job.method, job.replicate, d2, e.what()));
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(work.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t j = 0; j < work.size(); ++j) {
    if (kept[j]) result.first_fits.push_back({work[j].method, work[j].setting, std::move(*kept[j])});
  }
  return result;
}

std::vector<GroupFit> case_study(const Dataset& data, const RunConfig& cfg, const CaseStudyOptions& options,
                                 Rng& rng) {
  std::vector<std::string> groups = data.has_groups() ? data.group_names() : std::vector<std::string>{kSingleGroup};
  const std::vector<double> grid = options.grid.points();
  std::vector<GroupFit> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Dataset part = data.has_groups() ? data.subset(groups[g]) : data;
    if (part.size() < options.min_group_size) {
      throw DataError(DataErrorKind::TooFewRows, "group '" + groups[g] + "' has " + std::to_string(part.size()) +
                                                     " rows; at least " + std::to_string(options.min_group_size) +
                                                     " are required");
    }
    RunConfig local = cfg;
    local.gp.n_basis = options.n_basis;
    local.gp.lambda_shape = options.lambda_shape;
    local.gp.lambda_scale = options.lambda_scale;
    local.grid = options.grid;
    ChainOptions chain = make_chain_options(local, Variant::GpevA, part.size(), {options.sigma2, options.delta2});
    chain.keep_latent = false;
    Rng group_rng = rng.split(g);
    GroupFit fit;
    fit.group = groups[g];
    fit.n = part.size();
    fit.samples = run_chain(part, chain, group_rng);
    DrawMatrix f = fit.samples.f_draws();
    fit.f = summarize(f, grid, cfg.level);
    fit.f.density = covariate_density_summary(fit.samples, grid);
    for (auto& row : f) {
      for (std::size_t k = 0; k < grid.size(); ++k) row[k] -= grid[k];
    }
    fit.delta = summarize(f, grid, cfg.level);
    out.push_back(std::move(fit));
  }
  return out;
}

}  // namespace gpev
