#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace invlab {

/// Configuration or precondition violation detected before any computation.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched grids, time axes or vector sizes between operands.
class dimension_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to converge or produced an invalid result.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time stepping blew up (NaN/Inf detected mid-run).
class instability_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

/// Input lies outside the operator's domain (e.g. w(0) != 0 for invert_S).
class domain_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested regime is not covered (e.g. gamma > gamma* in schedule_sstar).
class out_of_regime_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic RNG used everywhere randomness is needed. The normal
/// deviates are produced by an explicit Box-Muller transform so streams
/// are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Stable mix of a base seed with stream labels, so that independent
/// experiment members get independent, reproducible streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  auto splitmix = [](std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t x = seed;
  std::uint64_t h = splitmix(x);
  x ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix(x);
  x ^= b + 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix(x);
  return h;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Falls back to the
/// calling thread for small n or jobs <= 1. Tasks must be independent;
/// result ordering is the caller's responsibility (index-addressed slots).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int jobs = 0);

/// Process-wide default worker count used when jobs == 0 (set by the CLI).
void set_default_jobs(int jobs);
int default_jobs();

}  // namespace invlab
