#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "dartsim/packet.hpp"
#include "dartsim/time.hpp"

namespace dartsim {

// One pinned misroute: a packet of the message leaves on `out` when it
// arrives on `in` carrying exactly `at_defl` prior deflections. Every packet
// walks the start packet's trajectory, so its deflection counter names its
// position along that walk; matching on it fires the pin exactly once per
// packet, at the same leg where the start was deflected. A packet whose
// detour loops back through this switch — even on the same ingress — no
// longer matches and routes normally, which keeps the detour finite and
// makes the end packet's single fire per pin also its last, so releasing on
// the end's fire can never strand packets that still need the pin.
struct DftPin {
    PortId out;
    PortId in;
    int at_defl;
};

// Deflected flow table: small exact-match map pinning a deflected message
// to one output port so every packet of the message repeats the same
// misroute. Entries live from the start packet's deflection until the end
// packet transits; overwriting a live entry is a simulator bug.
class DftTable {
public:
    explicit DftTable(int capacity) : capacity_(capacity) {}

    bool has_free_slot() const { return static_cast<int>(map_.size()) < capacity_; }
    int size() const { return static_cast<int>(map_.size()); }
    int high_water() const { return high_; }

    std::optional<DftPin> lookup(MsgId id) const {
        auto it = map_.find(id);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void alloc(MsgId id, PortId out, PortId in, int at_defl) {
        if (!has_free_slot()) throw std::logic_error("dft: alloc on full table");
        if (!map_.emplace(id, DftPin{out, in, at_defl}).second)
            throw std::logic_error("dft: entry overwrite attempted");
        high_ = std::max(high_, static_cast<int>(map_.size()));
    }

    void release(MsgId id) { map_.erase(id); }

private:
    int capacity_;
    int high_ = 0;
    std::unordered_map<MsgId, DftPin> map_;  // lookup only, never iterated
};

// PFC hysteresis thresholds for one ingress channel. The headroom absorbs
// everything that can still arrive after xoff is crossed: one link's worth
// of bytes in flight both ways during pause propagation plus the packet
// serializing upstream when the pause lands, so the attributed occupancy
// provably stays at or below capacity.
struct PfcThresholds {
    std::int64_t headroom = 0;
    std::int64_t xoff = 0;
    std::int64_t xon = 0;
    std::int64_t max_wire = 0;
};

inline PfcThresholds compute_pfc(std::int64_t capacity_bytes, double link_rate_bps,
                                 SimTime link_delay, std::int64_t max_wire_bytes) {
    PfcThresholds t;
    t.max_wire = max_wire_bytes;
    auto bdp = static_cast<std::int64_t>(
        std::ceil(link_rate_bps * 2.0 * static_cast<double>(link_delay) / 8e9));
    t.headroom = bdp + max_wire_bytes;
    t.xoff = capacity_bytes - t.headroom;
    t.xon = t.xoff - 2 * max_wire_bytes;
    if (t.xon <= 0) throw std::logic_error("pfc: capacity too small for headroom");
    return t;
}

// Strict threshold: a packet is marked iff the target data queue already
// holds more than the threshold when it is enqueued.
inline bool ecn_should_mark(std::int64_t occupancy_before, std::int64_t threshold) {
    return occupancy_before > threshold;
}

}  // namespace dartsim
