#pragma once

#include <string>
#include <vector>

#include "dartsim/config.hpp"
#include "dartsim/packet.hpp"

namespace dartsim {

struct IncastGroup {
    std::uint32_t id = 0;  // 1-based; 0 means "no group"
    NodeId receiver = -1;
    std::vector<NodeId> senders;  // distinct, none equal to receiver
};

struct Schedule {
    std::vector<Message> msgs;  // sorted by (start_time, id)
    std::vector<IncastGroup> groups;

    const IncastGroup* group_of(std::uint32_t gid) const {
        return gid == 0 ? nullptr : &groups[gid - 1];
    }
    std::int64_t total_bytes() const;
    std::int64_t short_bytes() const;
    // Bytes actually transmissible inside [0, duration): flows larger than
    // their remaining window are clipped to one line rate's worth. This is
    // the basis for the offered-load audit, since a long flow outlives any
    // desk-scale run.
    std::int64_t offered_bytes(SimTime duration, double line_rate_bps) const;
};

// Poisson incast groups + Poisson long flows, arrival rates solved so that
// expected offered bytes/s hit load * hosts * line_rate / oversubscription
// (the fabric's deliverable capacity under uniform receivers) split
// short:long by the configured mix. Pure function of (cfg, seed).
Schedule generate_schedule(const ExperimentConfig& cfg, std::uint64_t seed);

// One JSON object per line: src, dst, size, class, start_ns, group.
std::string schedule_jsonl(const Schedule& s);

}  // namespace dartsim
