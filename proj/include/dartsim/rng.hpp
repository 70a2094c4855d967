#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dartsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Each consumer owns one stream; identical (seed, stream_id) yields an
// identical draw sequence regardless of what other streams consumed.
enum class Stream : std::uint64_t {
    kWorkload = 1,
    kEcmpSalt = 2,
    kDeflect = 3,
    kJitter = 4,
};

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : gen_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id))) {}
    RngStream(std::uint64_t seed, Stream s)
        : RngStream(seed, static_cast<std::uint64_t>(s)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased draw in [0, n). Hand-rolled (Lemire) rather than
    // std::uniform_int_distribution so sequences do not depend on the
    // standard library version.
    std::uint64_t next_below(std::uint64_t n) {
        using u128 = unsigned __int128;
        u128 m = static_cast<u128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (-n) % n;
            while (lo < t) {
                m = static_cast<u128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exponential with the given mean; strictly positive.
    double next_exp(double mean) { return -std::log(1.0 - next_unit()) * mean; }

    // Uniform integer in [lo, hi].
    std::int64_t next_range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace dartsim
