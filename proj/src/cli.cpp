#include "gpev/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gpev/checks.hpp"
#include "gpev/csv.hpp"
#include "gpev/gp_exact.hpp"

namespace gpev {

namespace fs = std::filesystem;

namespace {

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out.empty() ? "_" : out;
}

std::vector<std::string> chain_header(bool with_delta2) {
  std::vector<std::string> h{"draw", "sigma2"};
  if (with_delta2) h.push_back("delta2");
  for (const char* c : {"lambda", "acc_w", "acc_s", "acc_x", "log_post"}) h.emplace_back(c);
  return h;
}

void chain_row(CsvWriter& w, const TraceRow& r, bool with_delta2) {
  w.cell(r.iteration).cell(r.sigma2);
  if (with_delta2) w.cell(r.delta2);
  w.cell(r.lambda).cell(r.acc_w).cell(r.acc_s).cell(r.acc_x).cell(r.log_posterior);
  w.end_row();
}

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  GridSpec g;
  double k = 0.0;
  if (parts.size() != 3 || !parse_double(parts[0], g.lo) || !parse_double(parts[1], g.hi) ||
      !parse_double(parts[2], k) || k != std::floor(k)) {
    throw ConfigError("grid", "--grid expects lo:hi:k, got '" + text + "'");
  }
  g.size = static_cast<int>(k);
  g.validate();
  return g;
}

NoiseSetting parse_noise(const std::string& key, const std::string& text) {
  if (text == "sample") return NoiseSetting::sample();
  double v = 0.0;
  if (!parse_double(text, v)) throw ConfigError(key, "--" + key + " expects a positive number or 'sample'");
  NoiseSetting s = NoiseSetting::fixed(v);
  s.validate(key);
  return s;
}

std::uint64_t resolve_seed(std::uint64_t flag_seed, bool flag_given, std::uint64_t config_seed) {
  if (const char* env = std::getenv("GPEV_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError("GPEV_SEED", "GPEV_SEED must be a non-negative integer");
    }
    return v;
  }
  return flag_given ? flag_seed : config_seed;
}

struct ChainOverrides {
  std::optional<int> iters, burn_in, thin;

  void add(CLI::App* app) {
    app->add_option("--iters", iters, "MCMC iterations (overrides config)");
    app->add_option("--burn-in", burn_in, "Burn-in sweeps (overrides config)");
    app->add_option("--thin", thin, "Thinning interval (overrides config)");
  }
  void apply(RunConfig& cfg) const {
    if (iters) cfg.mcmc.iters = *iters;
    if (burn_in) cfg.mcmc.burn_in = *burn_in;
    if (thin) cfg.mcmc.thin = *thin;
    cfg.mcmc.validate();
  }
};

struct SimulateArgs {
  std::string config, preset, methods, out = "out";
  std::optional<int> replicates;
  std::uint64_t seed = 1;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool full = false;
  ChainOverrides chain;
};

struct FitArgs {
  std::string config, data, delta2, sigma2, grid, out = "out";
  std::string column_w, column_y, column_group;
  std::uint64_t seed = 1;
  bool delta_of_x = false;
  ChainOverrides chain;
};

struct CheckArgs {
  std::string suite;
  std::uint64_t seed = 1;
  int draws = 100000;
};

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (p.empty()) continue;
    const Method m = parse_method(p);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ConfigError("methods", "--methods must name at least one method");
  // Keep figure order regardless of how the list was typed.
  std::vector<Method> ordered;
  for (Method m : all_methods()) {
    if (std::find(out.begin(), out.end(), m) != out.end()) ordered.push_back(m);
  }
  return ordered;
}

int cmd_simulate(const SimulateArgs& a, bool seed_given, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (!a.preset.empty()) apply_preset(cfg, a.preset);
  if (a.full) cfg.sim.replicates = 50;
  if (a.replicates) {
    if (*a.replicates < 1) throw ConfigError("replicates", "--replicates must be ≥ 1");
    cfg.sim.replicates = *a.replicates;
  }
  if (!a.methods.empty()) cfg.methods = parse_method_list(a.methods);
  a.chain.apply(cfg);
  cfg.seed = resolve_seed(a.seed, seed_given, cfg.seed);

  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(cfg, a.jobs, [&](const ReplicateRecord& r) {
    err << "  " << method_name(r.method) << " delta2=" << r.delta2 << " rep=" << r.replicate << " amse=" << r.amse
        << " (" << std::fixed << std::setprecision(2) << r.seconds << " s)" << std::defaultfloat
        << std::setprecision(6) << '\n';
  });
  write_experiment(a.out, result, cfg);
  print_table(out, result);
  err << "total " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  return kExitOk;
}

int cmd_fit(const FitArgs& a, bool seed_given, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  a.chain.apply(cfg);
  cfg.seed = resolve_seed(a.seed, seed_given, cfg.seed);
  if (!a.column_w.empty()) cfg.columns.w = a.column_w;
  if (!a.column_y.empty()) cfg.columns.y = a.column_y;
  if (!a.column_group.empty()) cfg.columns.group = a.column_group;

  CaseStudyOptions opt;
  if (cfg.gp.n_basis) opt.n_basis = *cfg.gp.n_basis;
  if (!a.grid.empty()) opt.grid = parse_grid(a.grid);
  if (cfg.sigma2) opt.sigma2 = *cfg.sigma2;
  if (!a.sigma2.empty()) opt.sigma2 = parse_noise("sigma2", a.sigma2);
  if (cfg.delta2) opt.delta2 = *cfg.delta2;
  if (!a.delta2.empty()) opt.delta2 = parse_noise("delta2", a.delta2);

  const Dataset data = load_dataset(a.data, cfg.columns);
  Rng rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<GroupFit> fits = case_study(data, cfg, opt, rng);
  err << "fit " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";

  fs::create_directories(a.out);
  for (const GroupFit& g : fits) {
    const std::string tag = safe_name(g.group);
    write_summary_csv(fs::path(a.out) / ("summary_" + tag + ".csv"), g.f);
    if (a.delta_of_x) {
      FunctionSummary d = g.delta;
      d.density.reset();
      write_summary_csv(fs::path(a.out) / ("delta_" + tag + ".csv"), d);
    }
    write_chain_csv(fs::path(a.out) / ("chain_" + tag + ".csv"), g.samples);
    write_draws_csv(fs::path(a.out) / ("draws_" + tag + ".csv"), g.samples);
    const AcceptanceStats& acc = g.samples.acceptance;
    out << g.group << ": n=" << g.n << " draws=" << g.samples.size() << " acceptance w=" << acc.w.rate()
        << " s=" << acc.s.rate() << " x=" << acc.x.rate() << " band radius=" << g.f.band_radius << '\n';
  }
  return kExitOk;
}

int cmd_check(const CheckArgs& a, bool seed_given, std::ostream& out) {
  CheckOptions opt;
  opt.seed = resolve_seed(a.seed, seed_given, 1);
  if (a.draws < 100) throw ConfigError("draws", "--draws must be ≥ 100");
  opt.draws = a.draws;
  const std::vector<CheckResult> results = run_checks(a.suite, opt);
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << r.detail << ")\n";
    all = all && r.passed;
  }
  out << (all ? "all checks passed" : "some checks failed") << '\n';
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

void write_summary_csv(const fs::path& path, const FunctionSummary& s) {
  std::vector<std::string> header{"grid", "mean", "lower", "upper", "band_lower", "band_upper"};
  if (s.density) header.emplace_back("density");
  CsvWriter w(path, header);
  const auto bl = s.band_lower(), bu = s.band_upper();
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    w.cell(s.grid[k]).cell(s.mean[k]).cell(s.lower[k]).cell(s.upper[k]).cell(bl[k]).cell(bu[k]);
    if (s.density) w.cell((*s.density)[k]);
    w.end_row();
  }
  w.close();
}

void write_chain_csv(const fs::path& path, const ChainSamples& samples) {
  CsvWriter w(path, chain_header(samples.delta2_sampled));
  for (const TraceRow& r : trace_rows(samples)) chain_row(w, r, samples.delta2_sampled);
  w.close();
}

void write_draws_csv(const fs::path& path, const ChainSamples& samples) {
  std::vector<std::string> header{"draw"};
  for (std::size_t k = 0; k < samples.grid.size(); ++k) header.push_back("f_" + std::to_string(k));
  CsvWriter w(path, header);
  for (const Draw& d : samples.draws) {
    w.cell(d.iteration);
    for (double v : d.f) w.cell(v);
    w.end_row();
  }
  w.close();
}

void write_experiment(const fs::path& dir, const ExperimentResult& result, const RunConfig& cfg) {
  fs::create_directories(dir / "chains");
  const std::size_t settings = result.delta2_grid.size();

  {
    std::vector<std::string> header{"method"};
    for (double d : result.delta2_grid) header.push_back("amse_" + format_double(d));
    for (double d : result.delta2_grid) header.push_back("se_" + format_double(d));
    CsvWriter w(dir / "table.csv", header);
    for (Method m : result.methods) {
      w.cell(method_name(m));
      for (std::size_t s = 0; s < settings; ++s) w.cell(result.mean_amse(m, s));
      for (std::size_t s = 0; s < settings; ++s) w.cell(result.sd_amse(m, s));
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(dir / "replicates.csv", {"method", "delta2", "replicate", "amse", "acc_w", "acc_s", "acc_x"});
    for (std::size_t s = 0; s < settings; ++s) {
      for (Method m : result.methods) {
        for (const auto& r : result.records) {
          if (r.setting != s || r.method != m) continue;
          w.cell(method_name(m)).cell(r.delta2).cell(r.replicate).cell(r.amse);
          if (m == Method::Decon) {
            w.cell("").cell("").cell("");
          } else {
            w.cell(r.acceptance.w.rate()).cell(r.acceptance.s.rate()).cell(r.acceptance.x.rate());
          }
          w.end_row();
        }
      }
    }
    w.close();
  }
  const std::vector<double> grid = cfg.grid.points();
  bool any_density = false;
  for (Method m : result.methods) {
    CsvWriter w(dir / ("fit_" + std::string(method_name(m)) + ".csv"),
                {"delta2", "grid", "truth", "mean", "lower", "upper", "band_lower", "band_upper"});
    for (const SettingFit& sf : result.first_fits) {
      if (sf.method != m) continue;
      const MethodFit& f = sf.fit;
      const auto bl = f.summary ? f.summary->band_lower() : std::vector<double>{};
      const auto bu = f.summary ? f.summary->band_upper() : std::vector<double>{};
      for (std::size_t k = 0; k < grid.size(); ++k) {
        w.cell(result.delta2_grid[sf.setting]).cell(grid[k]).cell(true_function(result.function, grid[k]));
        w.cell(f.f_hat[k]);
        if (f.summary) {
          w.cell(f.summary->lower[k]).cell(f.summary->upper[k]).cell(bl[k]).cell(bu[k]);
        } else {
          w.cell("").cell("").cell("").cell("");
        }
        w.end_row();
      }
      any_density = any_density || (f.summary && f.summary->density);
    }
    w.close();
  }
  if (any_density) {
    CsvWriter w(dir / "density.csv", {"delta2", "method", "grid", "density"});
    for (const SettingFit& sf : result.first_fits) {
      if (!sf.fit.summary || !sf.fit.summary->density) continue;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        w.cell(result.delta2_grid[sf.setting]).cell(method_name(sf.method)).cell(grid[k]);
        w.cell((*sf.fit.summary->density)[k]).end_row();
      }
    }
    w.close();
  }
  if (std::find(result.methods.begin(), result.methods.end(), Method::Decon) != result.methods.end()) {
    CsvWriter w(dir / "decon.csv", {"delta2", "grid", "p_hat", "f_hat", "clipped", "h"});
    for (const SettingFit& sf : result.first_fits) {
      if (!sf.fit.decon) continue;
      const DeconEstimate& e = *sf.fit.decon;
      for (std::size_t k = 0; k < e.grid.size(); ++k) {
        w.cell(result.delta2_grid[sf.setting]).cell(e.grid[k]).cell(e.p_hat[k]).cell(e.f_hat[k]);
        w.cell(e.clipped[k]).cell(e.h).end_row();
      }
    }
    w.close();
  }
  // One chain file per (method, replicate), settings stacked.
  for (Method m : result.methods) {
    if (m == Method::Decon) continue;
    for (int rep = 0; rep < result.replicates; ++rep) {
      std::vector<const ReplicateRecord*> recs;
      bool with_delta2 = false;
      for (const auto& r : result.records) {
        if (r.method == m && r.replicate == rep) {
          recs.push_back(&r);
          with_delta2 = with_delta2 || r.delta2_sampled;
        }
      }
      std::vector<std::string> header = chain_header(with_delta2);
      header.insert(header.begin(), "setting_delta2");
      CsvWriter w(dir / "chains" / (std::string(method_name(m)) + "_" + std::to_string(rep) + ".csv"), header);
      for (const ReplicateRecord* r : recs) {
        for (const TraceRow& row : r->trace) {
          w.cell(r->delta2);
          chain_row(w, row, with_delta2);
        }
      }
      w.close();
    }
  }
  std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
}

void print_table(std::ostream& out, const ExperimentResult& result) {
  out << "AMSE x 100, mean (sd) over " << result.replicates << " replicate(s), f = "
      << function_name(result.function) << '\n';
  out << std::left << std::setw(8) << "method";
  for (double d : result.delta2_grid) out << std::right << std::setw(18) << ("delta2=" + format_double(d));
  out << '\n';
  for (Method m : result.methods) {
    out << std::left << std::setw(8) << method_name(m);
    for (std::size_t s = 0; s < result.delta2_grid.size(); ++s) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << 100.0 * result.mean_amse(m, s) << " ("
           << 100.0 * result.sd_amse(m, s) << ")";
      out << std::right << std::setw(18) << cell.str();
    }
    out << '\n';
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian errors-in-variables regression with random Fourier feature GPs"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the replicated simulation study");
  simulate->add_option("--config", sim.config, "JSON configuration file");
  simulate->add_option("--preset", sim.preset, "table1 | table2 | table3");
  simulate->add_option("--replicates", sim.replicates, "Replicates per setting");
  auto* sim_seed = simulate->add_option("--seed", sim.seed, "Master seed (GPEV_SEED overrides)");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_option("--methods", sim.methods, "Comma-separated subset of gpev_a,gpev_f,gpev_n,gp,decon");
  simulate->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_flag("--full", sim.full, "50 replicates");
  sim.chain.add(simulate);

  FitArgs fit;
  CLI::App* fitc = app.add_subcommand("fit", "Fit the surrogate model to a dataset, per group");
  fitc->add_option("--data", fit.data, "Input CSV")->required();
  fitc->add_option("--config", fit.config, "JSON configuration file");
  fitc->add_option("--delta2", fit.delta2, "Measurement-error variance or 'sample'");
  fitc->add_option("--sigma2", fit.sigma2, "Regression noise variance or 'sample'");
  fitc->add_option("--grid", fit.grid, "lo:hi:k output grid (default -2:2:100)");
  fitc->add_flag("--delta-of-x", fit.delta_of_x, "Also summarize f(x) - x");
  auto* fit_seed = fitc->add_option("--seed", fit.seed, "Seed (GPEV_SEED overrides)");
  fitc->add_option("--out", fit.out, "Output directory");
  fitc->add_option("--column-w", fit.column_w, "Name of the W column");
  fitc->add_option("--column-y", fit.column_y, "Name of the Y column");
  fitc->add_option("--column-group", fit.column_group, "Name of the group column");
  fit.chain.add(fitc);

  CheckArgs chk;
  CLI::App* check = app.add_subcommand("check", "Run the built-in oracle checks");
  check->add_option("--suite", chk.suite, "rff-moments | kernel | conjugacy | invariance (default: all)");
  auto* chk_seed = check->add_option("--seed", chk.seed, "Seed (GPEV_SEED overrides)");
  check->add_option("--draws", chk.draws, "Monte Carlo draws for moment checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim, sim_seed->count() > 0, out, err);
    if (*fitc) return cmd_fit(fit, fit_seed->count() > 0, out, err);
    return cmd_check(chk, chk_seed->count() > 0, out);
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.key().empty()) err << " [" << e.key() << "]";
    err << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace gpev
