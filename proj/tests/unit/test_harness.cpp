#include <doctest.h>

#include <cmath>

#include "gpev/harness.hpp"
#include "oracles.hpp"

using namespace gpev;

namespace {

const std::filesystem::path fixtures{GPEV_FIXTURE_DIR};

RunConfig quick_config() {
  RunConfig cfg;
  cfg.sim.n = 60;
  cfg.sim.delta2_grid = {0.0, 0.1};
  cfg.sim.replicates = 2;
  cfg.mcmc.iters = 300;
  cfg.mcmc.burn_in = 100;
  cfg.mcmc.thin = 4;
  cfg.grid.size = 30;
  return cfg;
}

std::vector<double> sd_of(const FunctionSummary& s, const ChainSamples& samples, bool delta) {
  std::vector<double> sd(s.grid.size(), 0.0);
  for (const Draw& d : samples.draws)
    for (std::size_t k = 0; k < sd.size(); ++k) {
      const double v = d.f[k] - (delta ? s.grid[k] : 0.0) - s.mean[k];
      sd[k] += v * v;
    }
  for (auto& v : sd) v = std::sqrt(v / static_cast<double>(samples.size()));
  return sd;
}

}  // namespace

TEST_CASE("true_function") {
  CHECK(true_function(FunctionId::F1, 0.0) == 0.0);
  CHECK(true_function(FunctionId::F2, 2.0) == 1.5);
  CHECK(true_function(FunctionId::F1, -1.0) == doctest::Approx(-1.0));
  CHECK(true_function(FunctionId::F1, 1.0) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("generate") {
  SyntheticSpec spec;
  spec.n = 200;
  Rng r1(1);
  const SyntheticData clean = generate(spec, r1);
  CHECK(clean.data.w() == clean.latent_x);
  for (double x : clean.latent_x) {
    CHECK(x >= -3.0);
    CHECK(x < 3.0);
  }
  spec.sigma = 0.0;
  spec.delta2 = 0.3;
  Rng r2(2);
  const SyntheticData exact = generate(spec, r2);
  for (std::size_t i = 0; i < spec.n; ++i) CHECK(exact.data.y()[i] == true_function(FunctionId::F1, exact.latent_x[i]));

  spec.n = 100000;
  spec.delta2 = 0.5;
  spec.sigma = 0.2;
  Rng r3(3);
  const SyntheticData big = generate(spec, r3);
  std::vector<double> u(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) u[i] = big.data.w()[i] - big.latent_x[i];
  // Var of a normal sample variance: 2 sigma^4 / (n - 1).
  CHECK(std::abs(oracle::variance(u) - 0.5) < 3.0 * std::sqrt(2.0 * 0.25 / (spec.n - 1.0)));

  spec.x_law = XLaw::Custom;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.custom_x = [](Rng& r) { return r.normal(); };
  spec.n = 10;
  Rng r4(4);
  CHECK(generate(spec, r4).latent_x.size() == 10);
}

TEST_CASE("simulation defaults") {
  CHECK(simulation_n_basis(500) == 80);
  CHECK(simulation_n_basis(100) == 22);
  RunConfig cfg;
  NoiseConfig n = simulation_noise(cfg, 0.2, 0.0);
  CHECK_FALSE(n.sigma2.sampled);
  CHECK(n.sigma2.value == doctest::Approx(0.04));
  CHECK(n.delta2.value == kMinChainDelta2);
  cfg.delta2 = NoiseSetting::sample();
  CHECK(simulation_noise(cfg, 0.2, 0.5).delta2.sampled);
}

TEST_CASE("smoke run with the GP only and no error") {
  RunConfig cfg = quick_config();
  cfg.sim.delta2_grid = {0.0};
  cfg.sim.replicates = 1;
  cfg.methods = {Method::Gp};
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.records.size() == 1);
  CHECK(std::isfinite(r.records[0].amse));
  CHECK(r.first_fits.size() == 1);
}

TEST_CASE("experiment records, aggregation and determinism") {
  RunConfig cfg = quick_config();
  cfg.methods = {Method::GpevA, Method::Gp, Method::Decon};
  const ExperimentResult a = run_experiment(cfg, 1);
  const ExperimentResult b = run_experiment(cfg, 3);
  REQUIRE(a.records.size() == 2 * 2 * 3);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t j = 0; j < a.records.size(); ++j) {
    CHECK(a.records[j].amse == b.records[j].amse);
    CHECK(a.records[j].method == b.records[j].method);
  }
  CHECK(a.records[0].setting == 0);
  CHECK(a.records[0].replicate == 0);
  CHECK(a.records[1].method == Method::Gp);
  CHECK(a.records[3].replicate == 1);
  for (std::size_t s = 0; s < 2; ++s) {
    for (Method m : cfg.methods) {
      const auto v = a.amse_values(m, s);
      REQUIRE(v.size() == 2);
      CHECK(a.mean_amse(m, s) == (v[0] + v[1]) / 2.0);
      CHECK(a.sd_amse(m, s) == doctest::Approx(std::abs(v[0] - v[1]) / 2.0));
    }
  }
  CHECK(a.first_fits.size() == 2 * 3);
  CHECK(a.records[0].trace.size() == 50);
  CHECK(a.records[2].trace.empty());
}

TEST_CASE("errors carry the method and replicate") {
  RunConfig cfg = quick_config();
  cfg.methods = {Method::Decon};
  cfg.decon.bandwidths = {0.001, 0.002};
  cfg.sim.delta2_grid = {1.0};
  try {
    run_experiment(cfg);
    FAIL("expected ExperimentError");
  } catch (const ExperimentError& e) {
    CHECK(e.method() == Method::Decon);
    CHECK(e.replicate() == 0);
  }
}

TEST_CASE("case study on the identity fixture") {
  const Dataset d = load_dataset(fixtures / "case_study.csv", ColumnMap{"baseline", "followup", "arm"});
  RunConfig cfg;
  cfg.mcmc.iters = 3000;
  cfg.mcmc.burn_in = 1000;
  CaseStudyOptions fixed;
  fixed.delta2 = NoiseSetting::fixed(0.35);
  Rng r1(5), r2(6);
  const auto a = case_study(d, cfg, fixed, r1);
  const auto b = case_study(d, cfg, CaseStudyOptions{}, r2);
  REQUIRE(a.size() == 2);
  CHECK(a[0].group == "treatment");
  CHECK(a[1].group == "control");
  CHECK(a[0].n == 80);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto sd = sd_of(a[g].delta, a[g].samples, true);
    const auto bl = a[g].delta.band_lower(), bu = a[g].delta.band_upper();
    int small = 0, overlap = 0, covered = 0;
    for (std::size_t k = 0; k < sd.size(); ++k) {
      small += std::abs(a[g].delta.mean[k]) < 2.0 * sd[k];
      covered += bl[k] <= 0.0 && 0.0 <= bu[k];
      overlap += a[g].delta.lower[k] <= b[g].delta.upper[k] && b[g].delta.lower[k] <= a[g].delta.upper[k];
    }
    MESSAGE(a[g].group << ": " << small << " near zero, " << covered << " in band, " << overlap << " overlapping");
    // 80 rows per arm leave visible sampling bumps; pointwise 2 sd is not a joint statement.
    // The prior pulls f toward 0 at the sparse grid ends.
    CHECK(covered >= 98);
    CHECK(small >= 85);
    CHECK(overlap >= 90);
    CHECK(a[g].f.density.has_value());
    CHECK(a[g].delta.grid.front() == -2.0);
    CHECK(a[g].delta.grid.size() == 100);
  }
  CHECK(b[0].samples.delta2_sampled);
  CHECK_FALSE(a[0].samples.delta2_sampled);

  Rng r3(5);
  CHECK(case_study(d, cfg, fixed, r3)[1].delta.mean == a[1].delta.mean);
}

TEST_CASE("case study rejects small groups and labels ungrouped data") {
  const Dataset groups = load_dataset(fixtures / "groups.csv");
  RunConfig cfg;
  cfg.mcmc.iters = 100;
  cfg.mcmc.burn_in = 50;
  cfg.mcmc.thin = 1;
  Rng rng(7);
  try {
    case_study(groups, cfg, CaseStudyOptions{}, rng);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataErrorKind::TooFewRows);
  }
  const Dataset all = load_dataset(fixtures / "case_study.csv", ColumnMap{"baseline", "followup", "none"});
  const auto fits = case_study(all, cfg, CaseStudyOptions{}, rng);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].group == kSingleGroup);
  CHECK(fits[0].n == 160);
}
