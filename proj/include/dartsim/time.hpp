#pragma once

#include <cmath>
#include <cstdint>

namespace dartsim {

// Simulation clock: integer nanoseconds since run start.
using SimTime = std::int64_t;

constexpr SimTime kNsPerUs = 1000;
constexpr SimTime kNsPerMs = 1000 * 1000;
constexpr SimTime kNsPerSec = 1000LL * 1000 * 1000;

constexpr SimTime usec(double u) { return static_cast<SimTime>(u * 1e3); }
constexpr SimTime msec(double m) { return static_cast<SimTime>(m * 1e6); }
constexpr SimTime sec(double s) { return static_cast<SimTime>(s * 1e9); }

// Serialization time of `bytes` at `rate_bps`, rounded up to whole ns.
inline SimTime tx_time_ns(std::int64_t bytes, double rate_bps) {
    return static_cast<SimTime>(std::ceil(static_cast<double>(bytes) * 8e9 / rate_bps));
}

}  // namespace dartsim
