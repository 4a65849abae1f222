#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "gpev/cli.hpp"
#include "gpev/csv.hpp"
#include "oracles.hpp"

using namespace gpev;
namespace fs = std::filesystem;

namespace {

const fs::path fixtures{GPEV_FIXTURE_DIR};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "gpev");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> column(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  REQUIRE(c >= 0);
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row[static_cast<std::size_t>(c)]);
  return out;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string> kQuickChain{"--iters", "60", "--burn-in", "20", "--thin", "1"};

std::vector<std::string> with_chain(std::vector<std::string> args) {
  args.insert(args.end(), kQuickChain.begin(), kQuickChain.end());
  return args;
}

}  // namespace

TEST_CASE("table1 preset smoke run has five rows and six settings") {
  const auto dir = oracle::scratch_dir("cli_table1");
  const Outcome o = run(with_chain({"simulate", "--preset", "table1", "--replicates", "1", "--seed", "7", "--out",
                                    dir.string(), "--jobs", "1"}));
  REQUIRE(o.code == kExitOk);
  const CsvTable t = read_csv(dir / "table.csv");
  CHECK(t.rows.size() == 5);
  CHECK(column(t, "method") == std::vector<std::string>{"gpev_a", "gpev_f", "gpev_n", "gp", "decon"});
  CHECK(t.header.size() == 1 + 2 * 6);
  CHECK(t.header[1] == "amse_0.001");
  CHECK(t.header[7] == "se_0.001");
  for (const auto m : {"gpev_a", "gpev_f", "gpev_n", "gp", "decon"}) {
    CHECK(fs::exists(dir / ("fit_" + std::string(m) + ".csv")));
  }
  CHECK(fs::exists(dir / "replicates.csv"));
  CHECK(fs::exists(dir / "density.csv"));
  CHECK(fs::exists(dir / "decon.csv"));
  CHECK(fs::exists(dir / "chains" / "gpev_a_0.csv"));
  CHECK(fs::exists(dir / "config.json"));
  CHECK(o.out.find("gpev_a") != std::string::npos);

  // Table cells are exactly the mean of the replicate rows.
  const CsvTable reps = read_csv(dir / "replicates.csv");
  CHECK(reps.rows.size() == 5 * 6);
  const auto a = column(reps, "amse");
  const auto m = column(reps, "method");
  const auto d = column(reps, "delta2");
  for (std::size_t r = 0; r < reps.rows.size(); ++r) {
    if (m[r] != "decon" || d[r] != "1") continue;
    CHECK(t.rows[4][static_cast<std::size_t>(t.column("amse_1"))] == a[r]);
  }
}

TEST_CASE("methods filter and byte-identical reruns") {
  const auto d1 = oracle::scratch_dir("cli_det1");
  const auto d2 = oracle::scratch_dir("cli_det2");
  const auto dir_cfg = oracle::scratch_dir("cli_det_cfg");
  std::ofstream(dir_cfg / "c.json") << R"({"n": 80, "delta2_grid": [0.1, 0.5], "replicates": 2, "grid_size": 25})";
  auto args = [&](const fs::path& out) {
    return with_chain({"simulate", "--config", (dir_cfg / "c.json").string(), "--methods", "decon,gpev_a",
                       "--seed", "3", "--out", out.string(), "--jobs", "2"});
  };
  REQUIRE(run(args(d1)).code == kExitOk);
  REQUIRE(run(args(d2)).code == kExitOk);
  const CsvTable t = read_csv(d1 / "table.csv");
  CHECK(column(t, "method") == std::vector<std::string>{"gpev_a", "decon"});
  const auto files = files_under(d1);
  REQUIRE(files == files_under(d2));
  CHECK(files.size() >= 8);
  for (const auto& f : files) {
    INFO(f.string());
    CHECK(oracle::slurp(d1 / f) == oracle::slurp(d2 / f));
  }
  CHECK_FALSE(fs::exists(d1 / "fit_gp.csv"));
}

TEST_CASE("fit on the case-study fixture") {
  const auto dir = oracle::scratch_dir("cli_fit");
  const auto data = (fixtures / "case_study.csv").string();
  const std::vector<std::string> cols{"--column-w", "baseline", "--column-y", "followup", "--column-group", "arm"};
  auto fit_args = [&](const std::string& delta2, const fs::path& out) {
    std::vector<std::string> a{"fit", "--data", data, "--delta2", delta2, "--delta-of-x", "--grid=-2:2:100",
                               "--out", out.string(), "--seed", "4"};
    a.insert(a.end(), cols.begin(), cols.end());
    return with_chain(a);
  };
  const Outcome o = run(fit_args("0.35", dir / "fixed"));
  INFO(o.err);
  REQUIRE(o.code == kExitOk);
  for (const auto g : {"treatment", "control"}) {
    const auto p = dir / "fixed" / ("delta_" + std::string(g) + ".csv");
    REQUIRE(fs::exists(p));
    CHECK_NOTHROW(validate_csv_schema(p, {"grid", "mean", "lower", "upper", "band_lower", "band_upper"}));
    CHECK(read_csv(p).rows.size() == 100);
    CHECK(read_csv(dir / "fixed" / ("summary_" + std::string(g) + ".csv")).rows.size() == 100);
    CHECK(read_csv(dir / "fixed" / ("draws_" + std::string(g) + ".csv")).rows.size() == 40);
    CHECK(read_csv(dir / "fixed" / ("chain_" + std::string(g) + ".csv")).column("delta2") == -1);
  }
  REQUIRE(run(fit_args("sample", dir / "sampled")).code == kExitOk);
  CHECK(read_csv(dir / "sampled" / "chain_control.csv").column("delta2") >= 0);

  // Space-separated negative grid values are accepted too.
  std::vector<std::string> spaced{"fit", "--data", data, "--grid", "-2:2:7", "--out", (dir / "spaced").string()};
  spaced.insert(spaced.end(), cols.begin(), cols.end());
  const Outcome s = run(with_chain(spaced));
  INFO(s.err);
  CHECK(s.code == kExitOk);
  if (s.code == kExitOk) CHECK(read_csv(dir / "spaced" / "summary_control.csv").rows.size() == 7);

  REQUIRE(run(fit_args("0.35", dir / "again")).code == kExitOk);
  for (const auto& f : files_under(dir / "fixed")) CHECK(oracle::slurp(dir / "fixed" / f) == oracle::slurp(dir / "again" / f));
}

TEST_CASE("exit codes") {
  const auto dir = oracle::scratch_dir("cli_codes");
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"bogus"}).code == kExitConfig);
  CHECK(run({"simulate", "--methods", "gpev_a,kriging"}).code == kExitConfig);
  std::ofstream(dir / "bad.json") << R"({"n_basis": 0})";
  const Outcome bad = run({"simulate", "--config", (dir / "bad.json").string(), "--out", dir.string()});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("n_basis") != std::string::npos);
  CHECK(run({"fit", "--data", (fixtures / "missing_column.csv").string()}).code == kExitConfig);
  CHECK(run({"fit", "--data", (fixtures / "three_rows.csv").string(), "--grid", "1:2"}).code == kExitConfig);
  CHECK(run({"fit", "--data", (fixtures / "three_rows.csv").string(), "--delta2", "-1"}).code == kExitConfig);
  CHECK(run({"check", "--suite", "nope"}).code == kExitConfig);

  const Outcome ok = run({"check", "--suite", "invariance"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("PASS invariance") != std::string::npos);

  // Runtime failure: every decon bandwidth is refused by the overflow guard.
  std::ofstream(dir / "guard.json") << R"({"n": 40, "delta2_grid": [1.0], "replicates": 1, "methods": ["decon"],
                                          "decon_bandwidths": [0.001, 0.002]})";
  const Outcome rt = run({"simulate", "--config", (dir / "guard.json").string(), "--out", (dir / "o").string()});
  CHECK(rt.code == kExitRuntime);
  CHECK(rt.err.find("decon") != std::string::npos);
}

TEST_CASE("installed executable") {
  const std::string cmd = std::string("\"") + GPEV_CLI_PATH + "\" check --suite invariance > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string("\"") + GPEV_CLI_PATH + "\" check --suite nope > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == kExitConfig);
}
