#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecsim {

// splitmix64 (Steele/Lea/Flood); used only to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic per-stream engine: stream `index` of a master seed.
/// Distinct indices give statistically independent sequences, so Monte
/// Carlo trials can run in parallel with results independent of thread
/// scheduling.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t s = master_seed;
  (void)splitmix64(s);
  s ^= 0xd1342543de82ef95ULL * (index + 1);
  return std::mt19937_64(splitmix64(s));
}

/// Standard-normal sampler, Box-Muller with a cached spare value.
/// Pinned algorithm (instead of std::normal_distribution) so a given
/// engine state always yields the same draws regardless of the standard
/// library in use.
class GaussianSampler {
 public:
  double operator()(std::mt19937_64& eng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    const double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  void reset() { has_spare_ = false; }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecsim
