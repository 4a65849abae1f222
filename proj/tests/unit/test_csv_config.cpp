#include <doctest.h>

#include <fstream>

#include "gpev/config.hpp"
#include "gpev/csv.hpp"
#include "oracles.hpp"

using namespace gpev;
using nlohmann::json;

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23, 0.0, 123456789.0}) {
    double back = 0.0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  CHECK(format_double(0.04) == "0.04");
}

TEST_CASE("parse_double is strict") {
  double v = 0.0;
  CHECK(parse_double(" +1.5 ", v));
  CHECK(v == 1.5);
  CHECK_FALSE(parse_double("1.5x", v));
  CHECK_FALSE(parse_double("", v));
  CHECK_FALSE(parse_double("1,5", v));
}

TEST_CASE("split_csv_line handles quotes") {
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(split_csv_line("x,,y\r") == std::vector<std::string>{"x", "", "y"});
}

TEST_CASE("CsvWriter enforces the header width") {
  const auto dir = oracle::scratch_dir("csvwriter");
  CsvWriter w(dir / "t.csv", {"a", "b"});
  w.cell(1.0);
  CHECK_THROWS_AS(w.end_row(), std::logic_error);
  w.cell("x");
  CHECK_THROWS_AS(w.cell(2), std::logic_error);
  w.end_row();
  w.close();
  CHECK_NOTHROW(validate_csv_schema(dir / "t.csv", {"a", "b"}));
  CHECK_THROWS(validate_csv_schema(dir / "t.csv", {"a", "c"}));
}

TEST_CASE("empty config gives the documented defaults") {
  const RunConfig cfg = validate_config(json::object());
  CHECK(cfg.dpmm.truncation == 20);
  CHECK(cfg.dpmm.mu0 == 0.0);
  CHECK(cfg.dpmm.kappa0 == 1.0);
  CHECK(cfg.dpmm.a_tau == 1.0);
  CHECK(cfg.dpmm.b_tau == 1.0);
  CHECK(cfg.dpmm.alpha == 1.0);
  CHECK(cfg.gp.lambda_shape == 5.0);
  CHECK(cfg.gp.lambda_scale == 1.0);
  CHECK_FALSE(cfg.gp.n_basis.has_value());
  CHECK(cfg.mcmc.iters == 5000);
  CHECK(cfg.mcmc.burn_in == 2500);
  CHECK(cfg.mcmc.thin == 5);
  CHECK(cfg.mcmc.w_proposal_sd == 0.5);
  CHECK(cfg.grid.size == 100);
  CHECK(cfg.grid.lo == -3.0);
  CHECK(cfg.sim.replicates == 10);
  CHECK(cfg.methods == all_methods());
}

TEST_CASE("n_basis = 0 is rejected with the documented message") {
  try {
    validate_config(json{{"n_basis", 0}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "n_basis must be ≥ 1");
    CHECK(e.key() == "n_basis");
  }
}

TEST_CASE("fixed sigma2 echoes unsampled") {
  const RunConfig cfg = validate_config(json{{"sigma2", 0.04}});
  REQUIRE(cfg.sigma2.has_value());
  CHECK(cfg.sigma2->value == 0.04);
  CHECK_FALSE(cfg.sigma2->sampled);
  const json echo = to_json(cfg);
  CHECK(echo["sigma2"] == 0.04);
  CHECK(validate_config(json{{"delta2", "sample"}}).delta2->sampled);
  CHECK(to_json(validate_config(json{{"delta2", "sample"}}))["delta2"] == "sample");
}

TEST_CASE("normalized echo is a fixed point") {
  const RunConfig cfg = validate_config(json{{"n_basis", 40}, {"methods", {"gp", "decon"}}, {"seed", 77}});
  const json once = to_json(cfg);
  CHECK(to_json(validate_config(once)) == once);
}

TEST_CASE("config errors name their key") {
  auto key_of = [](const json& doc) {
    try {
      validate_config(doc);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of(json{{"methods", {"gpev_a", "spline"}}}) == "methods");
  CHECK(key_of(json{{"alpha", 0}}) == "alpha");
  CHECK(key_of(json{{"truncation", 0}}) == "truncation");
  CHECK(key_of(json{{"kappa0", -1}}) == "kappa0");
  CHECK(key_of(json{{"sigma2", -0.1}}) == "sigma2");
  CHECK(key_of(json{{"sigma2", "maybe"}}) == "sigma2");
  CHECK(key_of(json{{"burn_in", 6000}}) == "burn_in");
  CHECK(key_of(json{{"thin", 0}}) == "thin");
  CHECK(key_of(json{{"decon_nodes", 512}}) == "decon_nodes");
  CHECK(key_of(json{{"level", 1.0}}) == "level");
  CHECK(key_of(json{{"n_basis", 2.5}}) == "n_basis");
  CHECK(key_of(json{{"bogus", 1}}) == "bogus");
  CHECK(key_of(json{{"preset", "table9"}}) == "preset");
  CHECK(key_of(json{{"function", "f7"}}) == "function");
}

TEST_CASE("presets") {
  RunConfig cfg;
  apply_preset(cfg, "table2");
  CHECK(cfg.sim.n == 100);
  CHECK(cfg.sim.delta2_grid.front() == 0.01);
  apply_preset(cfg, "table1");
  CHECK(cfg.sim.n == 500);
  CHECK(cfg.sim.delta2_grid.size() == 6);
  CHECK(validate_config(json{{"preset", "table3"}}).sim.n == 250);
  CHECK(validate_config(json{{"full", true}}).sim.replicates == 50);
}

TEST_CASE("grid points") {
  const auto g = GridSpec{}.points();
  CHECK(g.size() == 100);
  CHECK(g.front() == -3.0);
  CHECK(g.back() == 3.0);
  CHECK(McmcSettings{}.retained() == 500);
  McmcSettings m;
  m.iters = 10;
  m.burn_in = 10;
  CHECK(m.retained() == 0);
  m.burn_in = 3;
  m.thin = 2;
  CHECK(m.retained() == 3);
}

TEST_CASE("load_config reads files") {
  const auto dir = oracle::scratch_dir("config");
  std::ofstream(dir / "c.json") << R"({"iters": 100, "burn_in": 50, "methods": ["gpev_a"]})";
  const RunConfig cfg = load_config(dir / "c.json");
  CHECK(cfg.mcmc.iters == 100);
  CHECK(cfg.methods == std::vector<Method>{Method::GpevA});
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}
