#pragma once

#include <cstdint>
#include <random>

namespace triphase {

// Deterministic random stream. Backed by std::mt19937_64, whose output
// sequence is pinned by the standard, with hand-rolled uniform helpers so
// draws are bit-identical across compilers and platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix(mix(seed))) {}

    // Stream for replicate `index` of a run seeded with `seed`. Streams for
    // distinct indices are independent and do not depend on draw order, which
    // keeps parallel replication schedules out of the results.
    static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(mix(seed) ^ mix(index * 0x9e3779b97f4a7c15ULL + 1));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    bool bernoulli(double p) { return next_unit() < p; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace triphase
