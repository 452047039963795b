#pragma once

#include <cmath>
#include <cstdint>

namespace silab {

// ============================================================================
// Deterministic random streams.
//
// Replicate b of a run draws from a stream derived from (master_seed, b), so
// any single replicate can be regenerated bit-exactly without replaying the
// ones before it.  Hand-rolled (splitmix64 + polar Gaussian) because the
// standard library's normal_distribution is not pinned across
// implementations and the reports promise byte-identical reruns.
// ============================================================================

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform on (0,1); never exactly 0 or 1
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
};

// Decorrelates (seed, index) pairs before seeding a stream.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 mix(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    mix.next_u64();
    return mix.next_u64();
}

// Standard normals via Marsaglia's polar method (no trig in the hot path).
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.next_unit() - 1.0;
            v = 2.0 * rng_.next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

  private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace silab
