#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gpev {

/// Explicit seeded random stream.
///
/// Every stochastic operation takes an `Rng&`; there is no global generator.
/// Child streams are derived from the seed and a key only, so the order in
/// which children are created never affects their output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  Rng split(std::uint64_t key) const;
  Rng split(std::initializer_list<std::uint64_t> keys) const;

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with shape/scale parameterization.
  double gamma(double shape, double scale);
  double beta(double a, double b);
  /// Index in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace gpev
