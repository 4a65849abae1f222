#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpev/rff_gp.hpp"
#include "oracles.hpp"

using namespace gpev;

namespace {
RffBasis make_basis(std::vector<double> a, std::vector<double> w, std::vector<double> s, double lambda = 1.0) {
  RffBasis b;
  b.amplitudes = Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  b.frequencies = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  b.phases = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  b.lambda = lambda;
  return b;
}
}  // namespace

TEST_CASE("se_kernel") {
  CHECK(se_kernel(0.7, 0.7, 3.0) == 1.0);
  CHECK(se_kernel(0.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(se_kernel(0.0, 2.0, 4.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(se_kernel(1.0, -2.0, 0.5) == se_kernel(-2.0, 1.0, 0.5));
}

TEST_CASE("sample_basis shapes and ranges") {
  Rng rng(1);
  const RffBasis one = sample_basis(1, 1.0, rng);
  CHECK(one.size() == 1);
  CHECK(one.phases[0] >= 0.0);
  CHECK(one.phases[0] < 2.0 * std::numbers::pi);
  CHECK_NOTHROW(one.validate());
  CHECK_THROWS_AS(sample_basis(0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_basis(3, 0.0, rng), std::invalid_argument);
}

TEST_CASE("sample_basis moments") {
  Rng rng(2);
  const RffBasis b = sample_basis(100000, 2.0, rng);
  std::vector<double> w(b.frequencies.data(), b.frequencies.data() + b.size());
  std::vector<double> a(b.amplitudes.data(), b.amplitudes.data() + b.size());
  const double n = static_cast<double>(b.size());
  // Var(w) = 2/lambda = 1; the sample variance of a normal has sd sqrt(2/n).
  CHECK(std::abs(oracle::variance(w) - 1.0) < 3.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(oracle::mean(a)) < 3.0 / std::sqrt(n));
  for (double s : std::vector<double>(b.phases.data(), b.phases.data() + b.size())) {
    REQUIRE(s >= 0.0);
    REQUIRE(s < 2.0 * std::numbers::pi);
  }
}

TEST_CASE("eval_surrogate closed cases") {
  const RffBasis zero = make_basis({0, 0, 0}, {0.3, -1, 2}, {0.1, 1, 2});
  const RffBasis single = make_basis({1}, {0}, {0});
  const RffBasis cancel = make_basis({1, 1}, {1, 1}, {0, std::numbers::pi});
  for (double x : {-3.0, -0.4, 0.0, 1.7, 10.0}) {
    CHECK(eval_surrogate(zero, x) == 0.0);
    CHECK(eval_surrogate(single, x) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(std::abs(eval_surrogate(cancel, x)) < 1e-14);
  }
}

TEST_CASE("design_matrix") {
  const RffBasis single = make_basis({1}, {0}, {0});
  const std::vector<double> x0{0.0};
  const Eigen::MatrixXd phi = design_matrix(single, x0);
  REQUIRE(phi.rows() == 1);
  REQUIRE(phi.cols() == 1);
  CHECK(phi(0, 0) == doctest::Approx(std::sqrt(2.0)));

  Rng rng(3);
  const RffBasis b = sample_basis(3, 1.0, rng);
  const std::vector<double> xs{-2.0, -0.5, 0.0, 0.8, 2.5};
  const Eigen::MatrixXd m = design_matrix(b, xs);
  CHECK(m.rows() == 5);
  CHECK(m.cols() == 3);
  CHECK(m.cwiseAbs().maxCoeff() <= std::sqrt(2.0 / 3.0) + 1e-15);
  const Eigen::VectorXd fit = m * b.amplitudes;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(fit[static_cast<Eigen::Index>(i)] == doctest::Approx(eval_surrogate(b, xs[i])).epsilon(1e-12));
  }
}

TEST_CASE("validate rejects malformed bases") {
  CHECK_THROWS_AS(make_basis({1, 2}, {1}, {0, 0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_basis({1}, {1}, {7.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_basis({1}, {1}, {-0.1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_basis({1}, {1}, {0.0}, 0.0).validate(), std::invalid_argument);
}

TEST_CASE("default_n_basis") {
  CHECK(default_n_basis(100) == 22);
  CHECK(default_n_basis(250) == 56);
  CHECK(default_n_basis(20) == 10);
  CHECK(default_n_basis(5) == 5);
}

TEST_CASE("surrogate covariance approaches the kernel") {
  // Average of f(x) f(y) over independent bases with N = 50.
  Rng rng(4);
  const int reps = 20000;
  double s00 = 0.0, s01 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const RffBasis b = sample_basis(50, 1.0, rng);
    const double f0 = eval_surrogate(b, 0.0), f1 = eval_surrogate(b, 1.0);
    s00 += f0 * f0;
    s01 += f0 * f1;
  }
  CHECK(s00 / reps == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s01 / reps == doctest::Approx(std::exp(-1.0)).epsilon(0.08));
}
