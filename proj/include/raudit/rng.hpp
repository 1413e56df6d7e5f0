#pragma once

// Deterministic randomness helpers. std::normal_distribution is
// implementation-defined, so gaussians are produced by an explicit
// Box-Muller transform over mt19937_64 output; identical seeds give
// identical streams on every platform.

#include <cmath>
#include <cstdint>
#include <random>

namespace raudit::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stable per-stream seed from a root seed, for per-run and per-agent
// substreams that stay reproducible under any scheduling.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t s = root ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Uniform double in (0,1], consuming exactly one engine draw.
inline double uniform_unit(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  // One standard-normal draw per call (two engine draws; the Box-Muller
  // sine partner is discarded to keep the stream position predictable).
  double standard() {
    const double u1 = uniform_unit(rng_);
    const double u2 = uniform_unit(rng_);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double sample(double mean, double stddev) { return mean + stddev * standard(); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace raudit::rng
