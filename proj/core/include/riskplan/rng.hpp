#pragma once

#include <cstdint>

#include "riskplan/normal.hpp"

// Splittable counter-style RNG built on the splitmix64 mixer. Streams are
// derived by name so that independent parts of a run (sampling, per-neighbor
// cost draws, rewiring) consume from disjoint sequences and parallel batches
// stay bit-reproducible.

namespace riskplan {

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Order-sensitive key combiner for deriving named sub-streams and per-run
// seeds (seed, label, label, ...).
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t label) {
    return mix64(key + kGolden64 + mix64(label * 0xD1342543DE82EF95ull + 1));
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : state_(mix64(key + kGolden64)) {}

    RngStream stream(std::uint64_t label) const {
        return RngStream(derive_key(state_, label));
    }

    std::uint64_t next_u64() {
        state_ += kGolden64;
        return mix64(state_);
    }

    // Uniform on the open interval (0, 1): values (k + 0.5) * 2^-53.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Inverse-CDF draw: exactly one uniform consumed per variate, so stream
    // positions are independent of the parameters.
    double normal(double mu, double sigma) {
        return mu + sigma * 1.41421356237309504880 * erf_inv(2.0 * uniform01() - 1.0);
    }

  private:
    std::uint64_t state_;
};

}  // namespace riskplan
