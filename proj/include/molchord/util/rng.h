//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_UTIL_RNG_H_
#define MOLCHORD_UTIL_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "molchord/util/hash.h"

namespace molchord {

// The standard distributions are implementation-defined, so uniform and
// normal variates are derived here directly from the engine's bit stream.
// Outputs are identical on every conforming platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0): engine_(splitmix64(seed)) { }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-free rejection keeps the arithmetic obvious.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; the spare variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Independent stream keyed by (base seed, pocket, sample index).
inline std::uint64_t stream_seed(std::uint64_t base, std::string_view key,
                                 std::uint64_t index) {
  return hash_values({ base, fnv1a64(key), index });
}

}  // namespace molchord

#endif  // MOLCHORD_UTIL_RNG_H_
