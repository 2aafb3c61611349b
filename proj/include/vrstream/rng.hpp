#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vrstream {

// Deterministic random source. mt19937_64 has a portable, standards-pinned
// output sequence; the distribution transforms live here (instead of
// <random>'s distribution objects, whose outputs are implementation-defined)
// so that every draw is bit-reproducible across compilers.
class rng {
public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // unit-mean exponential via inverse CDF; log1p keeps the argument away from log(0)
    double exponential1() { return -std::log1p(-uniform01()); }

    // integer in [0, n); multiply-shift keeps the mapping platform-stable
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// independent stream seed for (base seed, stream index)
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

} // namespace vrstream
