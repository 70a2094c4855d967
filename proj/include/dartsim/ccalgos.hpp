#pragma once

#include <algorithm>
#include <cmath>

#include "dartsim/time.hpp"

namespace dartsim {

// ---------------------------------------------------------------------------
// DCQCN reaction point. Runs natively under the DCQCN scheme and as the
// fallback governor under DART (fed only by non-suppressed marks).

struct DcqcnParams {
    double line_rate_bps = 10e9;
    double min_rate_bps = 10e6;
    double g = 1.0 / 256.0;
    double rate_ai_bps = 40e6;
    double rate_hai_bps = 400e6;
    std::int64_t byte_counter = 10LL * 1000 * 1000;  // bytes per stage event
    SimTime timer_period = 55 * kNsPerUs;
    int fr_stages = 5;  // stage events spent in fast recovery
    int ai_stages = 5;  // further stage events in additive increase
    SimTime cnp_min_gap = 50 * kNsPerUs;  // NP-side per-pair CNP rate limit
};

struct DcqcnRpState {
    double rc = 0;  // current rate
    double rt = 0;  // target rate
    double alpha = 1.0;
    int stage = 0;  // stage events since the last rate decrease
};

inline void dcqcn_on_cnp(DcqcnRpState& s, const DcqcnParams& p) {
    s.rt = s.rc;
    s.rc = std::max(p.min_rate_bps, s.rc * (1.0 - s.alpha / 2.0));
    s.alpha = (1.0 - p.g) * s.alpha + p.g;
    s.stage = 0;
}

inline void dcqcn_stage_event(DcqcnRpState& s, const DcqcnParams& p) {
    s.stage++;
    if (s.stage > p.fr_stages + p.ai_stages) {
        s.rt += p.rate_hai_bps;
    } else if (s.stage > p.fr_stages) {
        s.rt += p.rate_ai_bps;
    }
    s.rt = std::min(s.rt, p.line_rate_bps);
    s.rc = std::min(p.line_rate_bps, 0.5 * (s.rc + s.rt));
}

// Rate-increase timer expired with no CNP since the previous expiry: alpha
// decays, then the shared stage ladder advances.
inline void dcqcn_on_timer(DcqcnRpState& s, const DcqcnParams& p) {
    s.alpha = (1.0 - p.g) * s.alpha;
    dcqcn_stage_event(s, p);
}

// Byte counter rolled over: stage ladder only.
inline void dcqcn_on_bytes(DcqcnRpState& s, const DcqcnParams& p) {
    dcqcn_stage_event(s, p);
}

// ---------------------------------------------------------------------------
// TIMELY, window-based: the rate drives window = rate * min_rtt.

struct TimelyParams {
    double line_rate_bps = 10e9;
    double min_rate_bps = 10e6;
    SimTime t_low = 50 * kNsPerUs;
    SimTime t_high = 500 * kNsPerUs;
    double add_step_bps = 1e6;
    double beta = 0.8;
    double ewma_alpha = 0.125;
    int hai_after = 5;  // consecutive non-positive-gradient samples
    int hai_mult = 5;
    SimTime min_rtt = 65 * kNsPerUs;  // gradient normalizer, set from topology
};

struct TimelyState {
    double rate = 0;
    double rtt_diff = 0;
    SimTime prev_rtt = 0;
    int nonpos_gradient = 0;
};

inline void timely_on_completion(TimelyState& s, const TimelyParams& p, SimTime new_rtt) {
    if (s.prev_rtt == 0) {  // first sample only anchors the series
        s.prev_rtt = new_rtt;
        return;
    }
    double diff = static_cast<double>(new_rtt - s.prev_rtt);
    s.prev_rtt = new_rtt;
    s.rtt_diff = (1.0 - p.ewma_alpha) * s.rtt_diff + p.ewma_alpha * diff;
    double gradient = s.rtt_diff / static_cast<double>(p.min_rtt);
    if (new_rtt < p.t_low) {
        // Below the low threshold: plain additive step, gradient ignored.
        s.rate += p.add_step_bps;
    } else if (new_rtt > p.t_high) {
        s.nonpos_gradient = 0;
        s.rate *= 1.0 - p.beta * (1.0 - static_cast<double>(p.t_high) / static_cast<double>(new_rtt));
    } else if (gradient <= 0) {
        s.nonpos_gradient++;
        int n = s.nonpos_gradient >= p.hai_after ? p.hai_mult : 1;
        s.rate += n * p.add_step_bps;
    } else {
        s.nonpos_gradient = 0;
        s.rate *= std::max(0.0, 1.0 - p.beta * gradient);
    }
    s.rate = std::clamp(s.rate, p.min_rate_bps, p.line_rate_bps);
}

inline std::int64_t timely_window_bytes(const TimelyState& s, const TimelyParams& p,
                                        std::int64_t mtu) {
    auto w = static_cast<std::int64_t>(s.rate * static_cast<double>(p.min_rtt) / 8e9);
    return std::max(w, mtu);  // never below one packet or the pair deadlocks
}

}  // namespace dartsim
