#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpev/core_types.hpp"

namespace gpev {

struct McmcSettings {
  int iters = 5000;
  int burn_in = 2500;
  int thin = 5;
  double w_proposal_sd = 0.5;
  /// Random-walk sd on log(lambda) for the exact-GP chain.
  double log_lambda_proposal_sd = 0.3;

  /// floor((iters - burn_in) / thin).
  int retained() const { return iters > burn_in ? (iters - burn_in) / thin : 0; }
  void validate() const;
};

struct GridSpec {
  double lo = -3.0;
  double hi = 3.0;
  int size = 100;

  std::vector<double> points() const;
  void validate() const;
};

enum class FourierKernel { Smooth, Flat };

struct DeconSettings {
  FourierKernel kernel = FourierKernel::Smooth;
  int nodes = 513;
  /// Empty means the default candidate ladder.
  std::vector<double> bandwidths;
  int cv_folds = 5;
};

struct SimulationSettings {
  FunctionId function = FunctionId::F1;
  int n = 500;
  double sigma = 0.2;
  std::vector<double> delta2_grid{0.001, 0.005, 0.01, 0.1, 0.5, 1.0};
  int replicates = 10;
};

/// One experiment, fully described. Built by validate_config from a flat JSON object.
struct RunConfig {
  /// Unset: the harness fixes the generating value; `fit` samples.
  std::optional<NoiseSetting> sigma2;
  std::optional<NoiseSetting> delta2;
  GpHyper gp;
  DpmmHyper dpmm;
  McmcSettings mcmc;
  GridSpec grid;
  double level = 0.95;
  DeconSettings decon;
  std::vector<Method> methods = all_methods();
  SimulationSettings sim;
  ColumnMap columns;
  std::uint64_t seed = 1;
};

RunConfig validate_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
/// Normalized, defaults-filled echo of a configuration.
nlohmann::json to_json(const RunConfig& cfg);

/// Named experiment presets: "table1" (n=500), "table2" (n=100), "table3" (n=250).
void apply_preset(RunConfig& cfg, const std::string& preset);

}  // namespace gpev
