#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gpev {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class DataErrorKind { MissingFile, MissingColumn, NonNumericCell, RaggedRow, TooFewRows, Invalid };

class DataError : public std::runtime_error {
 public:
  DataError(DataErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  DataErrorKind kind() const { return kind_; }

 private:
  DataErrorKind kind_;
};

/// Paired observations (W_i, Y_i) with optional group labels.
///
/// Only the observed quantities live here; latent covariates are never part
/// of a Dataset, so estimators cannot see them.
class Dataset {
 public:
  /// Throws DataError unless sizes agree, n >= 2 and every value is finite.
  Dataset(std::vector<double> w, std::vector<double> y, std::vector<std::string> group = {});

  std::size_t size() const { return y_.size(); }
  const std::vector<double>& w() const { return w_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<std::string>& group() const { return group_; }
  bool has_groups() const { return !group_.empty(); }

  /// Distinct group labels in order of first appearance.
  std::vector<std::string> group_names() const;
  Dataset subset(std::string_view group) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<double> w_;
  std::vector<double> y_;
  std::vector<std::string> group_;
};

struct ColumnMap {
  std::string w = "w";
  std::string y = "y";
  std::string group = "group";
};

Dataset load_dataset(const std::filesystem::path& path, const ColumnMap& columns = {});
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// A variance that is either held fixed or sampled under the 1/v prior.
/// When sampled, `value` is the chain's starting point (<= 0 picks a data-driven start).
struct NoiseSetting {
  double value = 0.0;
  bool sampled = false;

  static NoiseSetting fixed(double v) { return {v, false}; }
  static NoiseSetting sample(double start = 0.0) { return {start, true}; }
  void validate(std::string_view name) const;
};

struct NoiseConfig {
  NoiseSetting sigma2;
  NoiseSetting delta2;
};

struct GpHyper {
  /// Unset means "pick from the sample size" (see default_n_basis).
  std::optional<int> n_basis;
  double lambda_shape = 5.0;  // a0
  double lambda_scale = 1.0;  // b0, scale parameterization
  std::optional<double> fixed_lambda;
  /// Use shape a0 instead of a0 + N/2 in the bandwidth update.
  bool literal_lambda_shape = false;

  void validate() const;
};

struct DpmmHyper {
  int truncation = 20;
  double alpha = 1.0;
  double mu0 = 0.0;
  /// Multiplies the atom variance: mu_h ~ N(mu0, kappa0 / tau_h).
  double kappa0 = 1.0;
  double a_tau = 1.0;
  /// Rate of the Gamma prior on tau_h.
  double b_tau = 1.0;

  void validate() const;
};

enum class FunctionId { F1, F2 };

std::string_view function_name(FunctionId f);
FunctionId parse_function(std::string_view name);

enum class Method { GpevA, GpevN, GpevF, Gp, Decon };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
/// Figure order: gpev_a, gpev_f, gpev_n, gp, decon.
const std::vector<Method>& all_methods();

}  // namespace gpev
