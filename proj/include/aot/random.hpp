#pragma once

// Seeded normal generator.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
// Seeds pass through SplitMix64 first, and independent streams are derived
// from (master seed, stream index) by SplitMix64 mixing, so parallel callers
// get disjoint, reproducible streams without shared state. Normals use the
// Box-Muller transform rather than std::normal_distribution, whose output is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "aot/gauss.hpp"

namespace aot {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream `index` of master seed `master`.
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(splitmix64(master) ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec normal_vector(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n draws of a + L eps, one draw per row.
inline Matrix sample(const GaussianSpec& mu, Index n, std::uint64_t seed) {
  if (n < 1) detail::fail(ErrorCode::BadParameter, "sample count must be at least 1");
  Rng rng(seed);
  const Index dim = mu.dim();
  const Matrix& l = mu.chol().matrix();
  Matrix draws(n, dim);
  for (Index r = 0; r < n; ++r) {
    const Vec eps = rng.normal_vector(dim);
    draws.row(r) = (mu.mean() + l * eps).transpose();
  }
  return draws;
}

/// G Gᵀ + ridge I with G standard normal.
inline Matrix random_spd(Rng& rng, Index n, double ridge = 0.5) {
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  const Matrix a = g * g.transpose() + ridge * Matrix::Identity(n, n);
  return (a + a.transpose()) / 2.0;
}

/// Standard normal mean with a random_spd covariance.
inline GaussianSpec random_gaussian(Rng& rng, Index n, double ridge = 0.5) {
  Vec mean = rng.normal_vector(n);
  return GaussianSpec(std::move(mean), random_spd(rng, n, ridge));
}

}  // namespace aot
