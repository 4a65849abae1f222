#include "gpev/rng.hpp"

#include <cmath>

namespace gpev {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

Rng Rng::split(std::uint64_t key) const {
  return Rng(mix64(seed_ ^ mix64(key ^ 0x632be59bd9b4e019ULL)));
}

Rng Rng::split(std::initializer_list<std::uint64_t> keys) const {
  Rng out = *this;
  for (auto k : keys) out = out.split(k);
  return out;
}

double Rng::uniform() {
  // generate_canonical may round up to exactly 1 on some library versions.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() { return std_normal_(engine_); }

double Rng::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

std::size_t Rng::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

}  // namespace gpev
