#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace robarb {

// Deterministic random source shared by every stochastic component.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the
// standard. Seeding goes through std::seed_seq (also fully specified), so a
// (seed, stream name, index) triple yields the same stream on every
// conforming platform. Distribution transforms are implemented here instead
// of using <random> distributions, whose algorithms are unspecified:
//   uniform()      : top 53 bits scaled by 2^-53, in [0, 1)
//   uniform_open() : (k + 0.5) * 2^-53, in (0, 1)
//   normal()       : Box-Muller on (uniform_open, uniform), both variates used
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent named sub-stream of a base seed, e.g. ("perturbation", 0).
  static Rng stream(std::uint64_t base_seed, std::string_view name,
                    std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  Rng() = default;

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// 64-bit FNV-1a, used for stream names and artifact fingerprints.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace robarb
