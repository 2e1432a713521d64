#pragma once
#include <cstdint>

namespace symcap {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Counter-based generator: the value for (seed, counter) is the SplitMix64
/// finalizer applied to seed + counter * golden. No state, so any shard of the
/// counter range can be evaluated independently.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + counter * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform double in [0,1) with 53 random bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

/// Thin sequential wrapper for code that just wants a stream of numbers.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t start = 0) : seed_(seed), ctr_(start) {}
    double uniform() { return counter_uniform(seed_, ctr_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by Box-Muller (consumes two counters).
    double normal();
    std::uint64_t counter() const { return ctr_; }
private:
    std::uint64_t seed_;
    std::uint64_t ctr_;
};

}  // namespace symcap
