#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>

#include "dartsim/time.hpp"
#include "dartsim/topology.hpp"

namespace dartsim {

// Active upstream sender set: receiver-side soft state counting distinct
// senders with at least one message in flight. A sender with several
// concurrent messages is counted once. Entries idle past the timeout are
// swept (crash robustness; in a lossless run every message ends cleanly).
class Auss {
public:
    explicit Auss(SimTime idle_timeout = 2 * kNsPerSec) : idle_timeout_(idle_timeout) {}

    void add(NodeId sender, SimTime now) {
        auto& e = entries_[sender];
        e.inflight++;
        e.last_seen = now;
    }

    void remove(NodeId sender, SimTime now) {
        auto it = entries_.find(sender);
        if (it == entries_.end()) return;
        it->second.last_seen = now;
        if (--it->second.inflight <= 0) entries_.erase(it);
    }

    // true if the sender was present (entry refreshed), false if evicted.
    bool refresh(NodeId sender, SimTime now) {
        auto it = entries_.find(sender);
        if (it == entries_.end()) return false;
        it->second.last_seen = now;
        return true;
    }

    bool contains(NodeId sender) const { return entries_.count(sender) != 0; }
    int size() const { return static_cast<int>(entries_.size()); }

    void sweep(SimTime now) {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (now - it->second.last_seen > idle_timeout_)
                it = entries_.erase(it);
            else
                ++it;
        }
    }

private:
    struct Entry {
        int inflight = 0;
        SimTime last_seen = 0;
    };
    std::map<NodeId, Entry> entries_;
    SimTime idle_timeout_;
};

// Look-ahead bookkeeping: an incast start packet advertises the full sender
// list; each listed sender is counted into the AUSS as if its message began
// at notification time. The pending set remembers which real starts were
// pre-counted so they do not count twice, applied at most once per group.
class LookaheadState {
public:
    // Returns the senders to pre-count (empty if the group was already
    // applied). `exclude` is the sender whose own packet carried the list;
    // its message is counted by the normal start path.
    template <typename Container>
    std::vector<NodeId> apply(std::uint32_t group, const Container& senders, NodeId exclude) {
        if (!applied_.insert(group).second) return {};
        std::vector<NodeId> fresh;
        auto& pend = pending_[group];
        for (NodeId s : senders) {
            if (s == exclude) continue;
            if (pend.insert(s).second) fresh.push_back(s);
        }
        return fresh;
    }

    // true if this start was pre-counted by a look-ahead notification.
    bool consume(std::uint32_t group, NodeId sender) {
        auto it = pending_.find(group);
        if (it == pending_.end()) return false;
        bool hit = it->second.erase(sender) != 0;
        if (it->second.empty()) pending_.erase(it);
        return hit;
    }

private:
    std::set<std::uint32_t> applied_;
    std::map<std::uint32_t, std::set<NodeId>> pending_;
};

// Delivered-goodput EWMA with an exponential time constant: a gap dt pulls
// the estimate toward the gap's instantaneous rate with weight
// 1 - exp(-dt/tau). Initialized optimistically at line rate so an idle
// receiver classifies a fresh burst as receiver congestion, not in-network.
class RxRateEstimator {
public:
    RxRateEstimator(double init_rate_bps, double tau_ns)
        : est_(init_rate_bps), tau_(tau_ns) {}

    void on_bytes(std::int64_t bytes, SimTime now) {
        if (last_ < 0) {  // first arrival anchors the clock
            last_ = now;
            return;
        }
        SimTime dt = now - last_;
        if (dt <= 0) dt = 1;
        last_ = now;
        double inst = static_cast<double>(bytes) * 8e9 / static_cast<double>(dt);
        double w = 1.0 - std::exp(-static_cast<double>(dt) / tau_);
        est_ = (1.0 - w) * est_ + w * inst;
    }

    double rate_bps() const { return est_; }

private:
    double est_;
    double tau_;
    SimTime last_ = -1;
};

// Receiver congestion classifier. Exactly one state per observation:
//   no recent mark                      -> NO_CONGESTION
//   recent mark, rx rate >= 0.9 * line  -> RECEIVER_CONGESTION
//   recent mark, rx rate below line     -> NON_RECEIVER_CONGESTION
enum class DasrState : std::uint8_t {
    kNoCongestion = 0,
    kReceiverCongestion = 1,
    kNonReceiverCongestion = 2,
};

class DasrFsm {
public:
    DasrFsm(SimTime window, double line_rate_bps, double line_fraction = 0.9)
        : window_(window), line_rate_(line_rate_bps), frac_(line_fraction) {}

    DasrState observe(bool ecn_ce, double rx_rate_bps, SimTime now) {
        if (ecn_ce) last_ecn_ = now;
        bool recent = last_ecn_ >= 0 && now - last_ecn_ <= window_;
        if (!recent) {
            state_ = DasrState::kNoCongestion;
        } else if (rx_rate_bps >= frac_ * line_rate_) {
            state_ = DasrState::kReceiverCongestion;
        } else {
            state_ = DasrState::kNonReceiverCongestion;
        }
        return state_;
    }

    DasrState state() const { return state_; }

private:
    SimTime window_;
    double line_rate_;
    double frac_;
    SimTime last_ecn_ = -1;
    DasrState state_ = DasrState::kNoCongestion;
};

// What the ACK for a data packet carries back, as a function of the receiver's
// congestion state.  Under receiver congestion the mark is folded into the
// sender count instead of being echoed; under non-receiver congestion the
// receiver stops apportioning (n = 1) and lets the echoed mark drive the
// sender's fallback governor.
struct AckFields {
    bool ecn_echo;
    std::uint16_t piggyback_n;
};

inline AckFields ack_fields(DasrState st, int auss_size, bool ecn_ce, bool suppress_on) {
    AckFields f;
    const bool suppressed = suppress_on && ecn_ce && st == DasrState::kReceiverCongestion;
    f.ecn_echo = ecn_ce && !suppressed;
    f.piggyback_n = st == DasrState::kNonReceiverCongestion
                        ? std::uint16_t{1}
                        : static_cast<std::uint16_t>(auss_size < 1 ? 1 : auss_size);
    return f;
}

}  // namespace dartsim
