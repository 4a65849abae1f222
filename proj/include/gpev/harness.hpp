#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpev/config.hpp"
#include "gpev/core_types.hpp"
#include "gpev/decon.hpp"
#include "gpev/rng.hpp"
#include "gpev/sampler.hpp"
#include "gpev/summaries.hpp"

namespace gpev {

/// f1(x) = sin(pi x / 2) / (1 + 2 x^2 (sign(x) + 1)), f2(x) = (x + x^2) / 4; sign(0) = 0.
double true_function(FunctionId f, double x);

enum class XLaw { Uniform, Custom };

struct SyntheticSpec {
  std::size_t n = 500;
  FunctionId function = FunctionId::F1;
  double sigma = 0.2;
  double delta2 = 0.0;
  XLaw x_law = XLaw::Uniform;  // Unif[-3, 3]
  std::function<double(Rng&)> custom_x;

  void validate() const;
};

/// The latent covariates live beside the Dataset, never inside it.
struct SyntheticData {
  Dataset data;
  std::vector<double> latent_x;
  FunctionId function;
};

SyntheticData generate(const SyntheticSpec& spec, Rng& rng);

/// Basis size used by the simulation study: 80 at n = 500, default_n_basis otherwise.
int simulation_n_basis(std::size_t n);

/// Smallest measurement-error variance handed to a chain when the data were generated without error.
inline constexpr double kMinChainDelta2 = 1e-10;

struct MethodFit {
  Method method = Method::GpevA;
  std::vector<double> grid;
  /// Posterior mean, or the deconvolution estimate.
  std::vector<double> f_hat;
  std::optional<FunctionSummary> summary;
  std::optional<ChainSamples> samples;
  std::optional<DeconEstimate> decon;
  double seconds = 0.0;
};

/// Noise handling for a synthetic fit: config overrides, otherwise fixed at the generating values.
NoiseConfig simulation_noise(const RunConfig& cfg, double sigma, double delta2);

/// Fits one estimator. `true_delta2` is the error variance handed to the deconvolution estimator.
MethodFit fit_method(Method method, const Dataset& data, const RunConfig& cfg, const NoiseConfig& noise,
                     double true_delta2, Rng& rng);

/// Per-draw scalars kept for chain dumps.
struct TraceRow {
  int iteration = 0;
  double sigma2 = 0.0;
  double delta2 = 0.0;
  double lambda = 0.0;
  double acc_w = 0.0;
  double acc_s = 0.0;
  double acc_x = 0.0;
  double log_posterior = 0.0;
};

struct ReplicateRecord {
  Method method = Method::GpevA;
  std::size_t setting = 0;
  double delta2 = 0.0;
  int replicate = 0;
  double amse = 0.0;
  double seconds = 0.0;
  AcceptanceStats acceptance;
  std::vector<TraceRow> trace;
  bool delta2_sampled = false;
};

/// Replicate-0 fit per (method, setting), kept for the grid summaries.
struct SettingFit {
  Method method = Method::GpevA;
  std::size_t setting = 0;
  MethodFit fit;
};

struct ExperimentResult {
  std::vector<double> delta2_grid;
  std::vector<Method> methods;
  int replicates = 0;
  FunctionId function = FunctionId::F1;
  /// Ordered by setting, then replicate, then method.
  std::vector<ReplicateRecord> records;
  std::vector<SettingFit> first_fits;

  std::vector<double> amse_values(Method m, std::size_t setting) const;
  double mean_amse(Method m, std::size_t setting) const;
  /// Population standard deviation across replicates.
  double sd_amse(Method m, std::size_t setting) const;
};

class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(Method method, int replicate, double delta2, const std::string& what);
  Method method() const { return method_; }
  int replicate() const { return replicate_; }

 private:
  Method method_;
  int replicate_;
};

/// Runs every (setting, replicate, method) job on `jobs` worker threads. Each job
/// owns an rng stream keyed by (seed, setting, replicate, method); the data stream
/// omits the method so all estimators see the same data.
ExperimentResult run_experiment(const RunConfig& cfg, int jobs = 1,
                                const std::function<void(const ReplicateRecord&)>& progress = {});

std::vector<TraceRow> trace_rows(const ChainSamples& samples);

struct CaseStudyOptions {
  int n_basis = 60;
  double lambda_shape = 1.0;
  double lambda_scale = 1.0 / 1.5;  // exponential prior with rate 1.5
  GridSpec grid{-2.0, 2.0, 100};
  NoiseSetting sigma2 = NoiseSetting::sample();
  NoiseSetting delta2 = NoiseSetting::sample();
  std::size_t min_group_size = 10;
};

struct GroupFit {
  std::string group;
  std::size_t n = 0;
  FunctionSummary f;
  /// Summary of f(x) - x.
  FunctionSummary delta;
  ChainSamples samples;
};

/// Label given to ungrouped data.
inline constexpr const char* kSingleGroup = "all";

/// One surrogate chain per group, in order of first appearance.
std::vector<GroupFit> case_study(const Dataset& data, const RunConfig& cfg, const CaseStudyOptions& options, Rng& rng);

}  // namespace gpev
