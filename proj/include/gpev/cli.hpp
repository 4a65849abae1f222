#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gpev/harness.hpp"
#include "gpev/sampler.hpp"
#include "gpev/summaries.hpp"

namespace gpev {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitCheckFailed = 3 };

/// Entry point for the `gpev` executable. Never throws.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// grid, mean, lower, upper, band_lower, band_upper[, density]
void write_summary_csv(const std::filesystem::path& path, const FunctionSummary& s);
/// draw, sigma2[, delta2], lambda, acc_w, acc_s, acc_x, log_post
void write_chain_csv(const std::filesystem::path& path, const ChainSamples& samples);
/// draw, f_0 .. f_{K-1}: one row per retained draw, one column per grid point.
void write_draws_csv(const std::filesystem::path& path, const ChainSamples& samples);

/// table.csv, replicates.csv, fit_<method>.csv, density.csv, decon.csv, chains/<method>_<rep>.csv
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result, const RunConfig& cfg);

/// Aligned text version of table.csv.
void print_table(std::ostream& out, const ExperimentResult& result);

}  // namespace gpev
