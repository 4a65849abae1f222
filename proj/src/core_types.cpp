#include "gpev/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpev/csv.hpp"

namespace gpev {

Dataset::Dataset(std::vector<double> w, std::vector<double> y, std::vector<std::string> group)
    : w_(std::move(w)), y_(std::move(y)), group_(std::move(group)) {
  if (w_.size() != y_.size()) {
    throw DataError(DataErrorKind::Invalid, "dataset: w and y have different lengths");
  }
  if (!group_.empty() && group_.size() != y_.size()) {
    throw DataError(DataErrorKind::Invalid, "dataset: group column length differs from y");
  }
  if (y_.size() < 2) {
    throw DataError(DataErrorKind::TooFewRows,
                    "dataset: need at least 2 observations, got " + std::to_string(y_.size()));
  }
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(w_[i]) || !std::isfinite(y_[i])) {
      throw DataError(DataErrorKind::Invalid, "dataset: non-finite value in row " + std::to_string(i + 1));
    }
  }
}

std::vector<std::string> Dataset::group_names() const {
  std::vector<std::string> names;
  for (const auto& g : group_) {
    if (std::find(names.begin(), names.end(), g) == names.end()) names.push_back(g);
  }
  return names;
}

Dataset Dataset::subset(std::string_view group) const {
  std::vector<double> w, y;
  std::vector<std::string> g;
  for (std::size_t i = 0; i < group_.size(); ++i) {
    if (group_[i] == group) {
      w.push_back(w_[i]);
      y.push_back(y_[i]);
      g.push_back(group_[i]);
    }
  }
  return Dataset(std::move(w), std::move(y), std::move(g));
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnMap& columns) {
  if (!std::filesystem::exists(path)) {
    throw DataError(DataErrorKind::MissingFile, "dataset file not found: " + path.string());
  }
  const CsvTable table = read_csv(path);
  const int wc = table.column(columns.w);
  const int yc = table.column(columns.y);
  const int gc = table.column(columns.group);
  if (wc < 0) throw DataError(DataErrorKind::MissingColumn, path.string() + ": missing column '" + columns.w + "'");
  if (yc < 0) throw DataError(DataErrorKind::MissingColumn, path.string() + ": missing column '" + columns.y + "'");

  std::vector<double> w, y;
  std::vector<std::string> group;
  w.reserve(table.rows.size());
  y.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw DataError(DataErrorKind::RaggedRow, path.string() + ": line " + std::to_string(r + 2) + " has " +
                                                    std::to_string(row.size()) + " cells, header has " +
                                                    std::to_string(table.header.size()));
    }
    double wv = 0.0, yv = 0.0;
    if (!parse_double(row[wc], wv)) {
      throw DataError(DataErrorKind::NonNumericCell, path.string() + ": line " + std::to_string(r + 2) +
                                                         ", column '" + columns.w + "': not a number: '" +
                                                         row[wc] + "'");
    }
    if (!parse_double(row[yc], yv)) {
      throw DataError(DataErrorKind::NonNumericCell, path.string() + ": line " + std::to_string(r + 2) +
                                                         ", column '" + columns.y + "': not a number: '" +
                                                         row[yc] + "'");
    }
    w.push_back(wv);
    y.push_back(yv);
    if (gc >= 0) group.push_back(row[gc]);
  }
  if (y.size() < 2) {
    throw DataError(DataErrorKind::TooFewRows,
                    path.string() + ": need at least 2 rows, found " + std::to_string(y.size()));
  }
  return Dataset(std::move(w), std::move(y), std::move(group));
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::vector<std::string> header{"w", "y"};
  if (data.has_groups()) header.push_back("group");
  CsvWriter out(path, header);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.cell(data.w()[i]).cell(data.y()[i]);
    if (data.has_groups()) out.cell(data.group()[i]);
    out.end_row();
  }
  out.close();
}

void NoiseSetting::validate(std::string_view name) const {
  if (!sampled && !(value > 0.0 && std::isfinite(value))) {
    throw ConfigError(std::string(name), std::string(name) + " must be a positive number or \"sample\"");
  }
}

void GpHyper::validate() const {
  if (n_basis && *n_basis < 1) throw ConfigError("n_basis", "n_basis must be ≥ 1");
  if (!(lambda_shape > 0.0)) throw ConfigError("lambda_shape", "lambda_shape must be > 0");
  if (!(lambda_scale > 0.0)) throw ConfigError("lambda_scale", "lambda_scale must be > 0");
  if (fixed_lambda && !(*fixed_lambda > 0.0)) throw ConfigError("fixed_lambda", "fixed_lambda must be > 0");
}

void DpmmHyper::validate() const {
  if (truncation < 1) throw ConfigError("truncation", "truncation must be ≥ 1");
  if (!(alpha > 0.0)) throw ConfigError("alpha", "alpha must be > 0");
  if (!std::isfinite(mu0)) throw ConfigError("mu0", "mu0 must be finite");
  if (!(kappa0 > 0.0)) throw ConfigError("kappa0", "kappa0 must be > 0");
  if (!(a_tau > 0.0)) throw ConfigError("a_tau", "a_tau must be > 0");
  if (!(b_tau > 0.0)) throw ConfigError("b_tau", "b_tau must be > 0");
}

std::string_view function_name(FunctionId f) { return f == FunctionId::F1 ? "f1" : "f2"; }

FunctionId parse_function(std::string_view name) {
  if (name == "f1") return FunctionId::F1;
  if (name == "f2") return FunctionId::F2;
  throw ConfigError("function", "unknown function '" + std::string(name) + "' (expected f1 or f2)");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::GpevA: return "gpev_a";
    case Method::GpevN: return "gpev_n";
    case Method::GpevF: return "gpev_f";
    case Method::Gp: return "gp";
    case Method::Decon: return "decon";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("methods", "unknown estimator '" + std::string(name) +
                                   "' (expected gpev_a, gpev_f, gpev_n, gp or decon)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> order{Method::GpevA, Method::GpevF, Method::GpevN, Method::Gp, Method::Decon};
  return order;
}

}  // namespace gpev
