#include "gpev/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace gpev {

using nlohmann::json;

void McmcSettings::validate() const {
  if (iters < 0) throw ConfigError("iters", "iters must be ≥ 0");
  if (burn_in < 0) throw ConfigError("burn_in", "burn_in must be ≥ 0");
  if (burn_in > iters) throw ConfigError("burn_in", "burn_in must not exceed iters");
  if (thin < 1) throw ConfigError("thin", "thin must be ≥ 1");
  if (!(w_proposal_sd > 0.0)) throw ConfigError("w_proposal_sd", "w_proposal_sd must be > 0");
  if (!(log_lambda_proposal_sd > 0.0)) {
    throw ConfigError("log_lambda_proposal_sd", "log_lambda_proposal_sd must be > 0");
  }
}

std::vector<double> GridSpec::points() const {
  std::vector<double> out(static_cast<std::size_t>(size));
  if (size == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / (size - 1);
  for (int k = 0; k < size; ++k) out[k] = lo + step * k;
  out.back() = hi;
  return out;
}

void GridSpec::validate() const {
  if (size < 1) throw ConfigError("grid_size", "grid_size must be ≥ 1");
  if (!(hi > lo) && size > 1) throw ConfigError("grid_hi", "grid_hi must exceed grid_lo");
}

namespace {

const std::set<std::string> kKnownKeys{
    "n_basis",      "lambda_shape", "lambda_scale",  "fixed_lambda",  "lambda_shape_literal",
    "truncation",   "alpha",        "mu0",           "kappa0",        "a_tau",
    "b_tau",        "sigma2",       "delta2",        "iters",         "burn_in",
    "thin",         "w_proposal_sd", "log_lambda_proposal_sd", "grid_lo", "grid_hi",
    "grid_size",    "level",        "decon_kernel",  "decon_nodes",   "decon_bandwidths",
    "cv_folds",     "methods",      "function",      "n",             "sigma",
    "delta2_grid",  "replicates",   "full",          "seed",          "column_w",
    "column_y",     "column_group", "preset"};

double number(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, std::string(key) + " must be a number");
  return v.get<double>();
}

int integer(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, std::string(key) + " must be an integer");
  const double d = v.get<double>();
  if (d != std::floor(d)) throw ConfigError(key, std::string(key) + " must be an integer");
  return static_cast<int>(d);
}

NoiseSetting noise(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "sample") return NoiseSetting::sample();
    throw ConfigError(key, std::string(key) + " must be a positive number or \"sample\"");
  }
  NoiseSetting s = NoiseSetting::fixed(number(doc, key));
  s.validate(key);
  return s;
}

std::vector<double> number_list(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_array()) throw ConfigError(key, std::string(key) + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key, std::string(key) + " must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string text(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_string()) throw ConfigError(key, std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig validate_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown configuration key '" + key + "'");
  }
  RunConfig cfg;
  if (doc.contains("preset")) apply_preset(cfg, text(doc, "preset"));

  if (doc.contains("n_basis")) {
    const json& v = doc.at("n_basis");
    if (!(v.is_string() && v.get<std::string>() == "auto")) cfg.gp.n_basis = integer(doc, "n_basis");
  }
  if (doc.contains("lambda_shape")) cfg.gp.lambda_shape = number(doc, "lambda_shape");
  if (doc.contains("lambda_scale")) cfg.gp.lambda_scale = number(doc, "lambda_scale");
  if (doc.contains("fixed_lambda") && !doc.at("fixed_lambda").is_null()) {
    cfg.gp.fixed_lambda = number(doc, "fixed_lambda");
  }
  if (doc.contains("lambda_shape_literal")) {
    if (!doc.at("lambda_shape_literal").is_boolean()) {
      throw ConfigError("lambda_shape_literal", "lambda_shape_literal must be true or false");
    }
    cfg.gp.literal_lambda_shape = doc.at("lambda_shape_literal").get<bool>();
  }

  if (doc.contains("truncation")) cfg.dpmm.truncation = integer(doc, "truncation");
  if (doc.contains("alpha")) cfg.dpmm.alpha = number(doc, "alpha");
  if (doc.contains("mu0")) cfg.dpmm.mu0 = number(doc, "mu0");
  if (doc.contains("kappa0")) cfg.dpmm.kappa0 = number(doc, "kappa0");
  if (doc.contains("a_tau")) cfg.dpmm.a_tau = number(doc, "a_tau");
  if (doc.contains("b_tau")) cfg.dpmm.b_tau = number(doc, "b_tau");

  if (doc.contains("sigma2") && !doc.at("sigma2").is_null()) cfg.sigma2 = noise(doc, "sigma2");
  if (doc.contains("delta2") && !doc.at("delta2").is_null()) cfg.delta2 = noise(doc, "delta2");

  if (doc.contains("iters")) cfg.mcmc.iters = integer(doc, "iters");
  if (doc.contains("burn_in")) cfg.mcmc.burn_in = integer(doc, "burn_in");
  if (doc.contains("thin")) cfg.mcmc.thin = integer(doc, "thin");
  if (doc.contains("w_proposal_sd")) cfg.mcmc.w_proposal_sd = number(doc, "w_proposal_sd");
  if (doc.contains("log_lambda_proposal_sd")) {
    cfg.mcmc.log_lambda_proposal_sd = number(doc, "log_lambda_proposal_sd");
  }

  if (doc.contains("grid_lo")) cfg.grid.lo = number(doc, "grid_lo");
  if (doc.contains("grid_hi")) cfg.grid.hi = number(doc, "grid_hi");
  if (doc.contains("grid_size")) cfg.grid.size = integer(doc, "grid_size");
  if (doc.contains("level")) cfg.level = number(doc, "level");

  if (doc.contains("decon_kernel")) {
    const std::string k = text(doc, "decon_kernel");
    if (k == "smooth") cfg.decon.kernel = FourierKernel::Smooth;
    else if (k == "flat") cfg.decon.kernel = FourierKernel::Flat;
    else throw ConfigError("decon_kernel", "decon_kernel must be \"smooth\" or \"flat\"");
  }
  if (doc.contains("decon_nodes")) cfg.decon.nodes = integer(doc, "decon_nodes");
  if (doc.contains("decon_bandwidths")) cfg.decon.bandwidths = number_list(doc, "decon_bandwidths");
  if (doc.contains("cv_folds")) cfg.decon.cv_folds = integer(doc, "cv_folds");

  if (doc.contains("methods")) {
    const json& v = doc.at("methods");
    if (!v.is_array() || v.empty()) throw ConfigError("methods", "methods must be a non-empty list");
    cfg.methods.clear();
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("methods", "methods must be a list of names");
      cfg.methods.push_back(parse_method(e.get<std::string>()));
    }
  }
  if (doc.contains("function")) cfg.sim.function = parse_function(text(doc, "function"));
  if (doc.contains("n")) cfg.sim.n = integer(doc, "n");
  if (doc.contains("sigma")) cfg.sim.sigma = number(doc, "sigma");
  if (doc.contains("delta2_grid")) cfg.sim.delta2_grid = number_list(doc, "delta2_grid");
  if (doc.contains("replicates")) cfg.sim.replicates = integer(doc, "replicates");
  if (doc.contains("full")) {
    if (!doc.at("full").is_boolean()) throw ConfigError("full", "full must be true or false");
    if (doc.at("full").get<bool>()) cfg.sim.replicates = 50;
  }
  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("seed", "seed must be a non-negative integer");
    }
    cfg.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("column_w")) cfg.columns.w = text(doc, "column_w");
  if (doc.contains("column_y")) cfg.columns.y = text(doc, "column_y");
  if (doc.contains("column_group")) cfg.columns.group = text(doc, "column_group");

  cfg.gp.validate();
  cfg.dpmm.validate();
  cfg.mcmc.validate();
  cfg.grid.validate();
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("level", "level must lie in (0, 1)");
  if (cfg.decon.nodes < 5 || (cfg.decon.nodes - 1) % 4 != 0) {
    throw ConfigError("decon_nodes", "decon_nodes must be ≥ 5 and of the form 4k+1");
  }
  for (double h : cfg.decon.bandwidths) {
    if (!(h > 0.0)) throw ConfigError("decon_bandwidths", "bandwidth candidates must be > 0");
  }
  if (cfg.decon.cv_folds < 2) throw ConfigError("cv_folds", "cv_folds must be ≥ 2");
  if (cfg.sim.n < 2) throw ConfigError("n", "n must be ≥ 2");
  if (!(cfg.sim.sigma >= 0.0)) throw ConfigError("sigma", "sigma must be ≥ 0");
  if (cfg.sim.delta2_grid.empty()) throw ConfigError("delta2_grid", "delta2_grid must not be empty");
  for (double d : cfg.sim.delta2_grid) {
    if (!(d >= 0.0)) throw ConfigError("delta2_grid", "delta2_grid entries must be ≥ 0");
  }
  if (cfg.sim.replicates < 1) throw ConfigError("replicates", "replicates must be ≥ 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return validate_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["n_basis"] = cfg.gp.n_basis ? json(*cfg.gp.n_basis) : json("auto");
  j["lambda_shape"] = cfg.gp.lambda_shape;
  j["lambda_scale"] = cfg.gp.lambda_scale;
  j["fixed_lambda"] = cfg.gp.fixed_lambda ? json(*cfg.gp.fixed_lambda) : json(nullptr);
  j["lambda_shape_literal"] = cfg.gp.literal_lambda_shape;
  j["truncation"] = cfg.dpmm.truncation;
  j["alpha"] = cfg.dpmm.alpha;
  j["mu0"] = cfg.dpmm.mu0;
  j["kappa0"] = cfg.dpmm.kappa0;
  j["a_tau"] = cfg.dpmm.a_tau;
  j["b_tau"] = cfg.dpmm.b_tau;
  auto noise_json = [](const std::optional<NoiseSetting>& s) -> json {
    if (!s) return nullptr;
    if (s->sampled) return "sample";
    return s->value;
  };
  j["sigma2"] = noise_json(cfg.sigma2);
  j["delta2"] = noise_json(cfg.delta2);
  j["iters"] = cfg.mcmc.iters;
  j["burn_in"] = cfg.mcmc.burn_in;
  j["thin"] = cfg.mcmc.thin;
  j["w_proposal_sd"] = cfg.mcmc.w_proposal_sd;
  j["log_lambda_proposal_sd"] = cfg.mcmc.log_lambda_proposal_sd;
  j["grid_lo"] = cfg.grid.lo;
  j["grid_hi"] = cfg.grid.hi;
  j["grid_size"] = cfg.grid.size;
  j["level"] = cfg.level;
  j["decon_kernel"] = cfg.decon.kernel == FourierKernel::Smooth ? "smooth" : "flat";
  j["decon_nodes"] = cfg.decon.nodes;
  j["decon_bandwidths"] = cfg.decon.bandwidths;
  j["cv_folds"] = cfg.decon.cv_folds;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(method_name(m)));
  j["methods"] = methods;
  j["function"] = std::string(function_name(cfg.sim.function));
  j["n"] = cfg.sim.n;
  j["sigma"] = cfg.sim.sigma;
  j["delta2_grid"] = cfg.sim.delta2_grid;
  j["replicates"] = cfg.sim.replicates;
  j["seed"] = cfg.seed;
  j["column_w"] = cfg.columns.w;
  j["column_y"] = cfg.columns.y;
  j["column_group"] = cfg.columns.group;
  return j;
}

void apply_preset(RunConfig& cfg, const std::string& preset) {
  if (preset == "table1") {
    cfg.sim.n = 500;
    cfg.sim.delta2_grid = {0.001, 0.005, 0.01, 0.1, 0.5, 1.0};
  } else if (preset == "table2") {
    cfg.sim.n = 100;
    cfg.sim.delta2_grid = {0.01, 0.2, 0.4, 0.6, 0.8, 1.0};
  } else if (preset == "table3") {
    cfg.sim.n = 250;
    cfg.sim.delta2_grid = {0.01, 0.2, 0.4, 0.6, 0.8, 1.0};
  } else {
    throw ConfigError("preset", "unknown preset '" + preset + "' (expected table1, table2 or table3)");
  }
}

}  // namespace gpev
