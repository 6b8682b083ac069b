#pragma once

#include <cmath>
#include <cstdint>

#include "aloha/errors.hpp"

namespace aloha {

/// Counter-based uniform streams in the splitmix64 family: every draw is a
/// pure function of (master seed, replication, purpose, slot, index), so
/// replications can run on any schedule and still reproduce bit-identically.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum class Purpose : std::uint64_t {
  arrivals = 1,
  transmission = 2,       // the one uniform U(n) per slot
  reneging = 3,           // per-customer uniforms U(n,j)
  reneging_binomial = 4,  // fast-path per-class binomial draws
};

struct StreamKey {
  std::uint64_t v = 0;
};

inline StreamKey derive_stream(std::uint64_t master_seed, std::uint64_t replication,
                               Purpose purpose) {
  std::uint64_t z = mix64(master_seed + kGolden);
  z = mix64(z + kGolden * (replication + 1));
  z = mix64(z + kGolden * static_cast<std::uint64_t>(purpose));
  return StreamKey{z};
}

inline std::uint64_t at(StreamKey key, std::uint64_t slot, std::uint64_t idx) {
  const std::uint64_t slot_key = mix64(key.v + kGolden * (slot + 1));
  return mix64(slot_key + kGolden * (idx + 1));
}

/// Uniform on [0,1) with 53 random bits.
inline double uniform01(StreamKey key, std::uint64_t slot, std::uint64_t idx) {
  return static_cast<double>(at(key, slot, idx) >> 11) * 0x1.0p-53;
}

/// Poisson sample by CDF inversion of a single uniform. Suited to the
/// per-slot arrival means used here (mean well below ~700, where exp(-mean)
/// underflows).
inline std::int64_t poisson_inverse(double mean, double u) {
  double pmf = std::exp(-mean);
  double cdf = pmf;
  std::int64_t n = 0;
  while (u >= cdf) {
    ++n;
    pmf *= mean / static_cast<double>(n);
    cdf += pmf;
    if (n > 1'000'000) throw NumericFailure("poisson inversion ran away; mean too large");
  }
  return n;
}

/// Binomial(n, q) sample by CDF inversion of a single uniform.
inline std::int64_t binomial_inverse(std::int64_t n, double q, double u) {
  if (n <= 0) return 0;
  if (q >= 1.0) return n;
  if (q <= 0.0) return 0;
  const double ratio = q / (1.0 - q);
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-q));
  double cdf = pmf;
  std::int64_t k = 0;
  while (u >= cdf && k < n) {
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pmf;
  }
  return k;
}

}  // namespace rng
}  // namespace aloha
