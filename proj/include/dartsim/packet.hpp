#pragma once

#include <cstdint>
#include <vector>

#include "dartsim/time.hpp"
#include "dartsim/topology.hpp"

namespace dartsim {

enum class PacketKind : std::uint8_t { kData, kAck, kCnp };

// Data virtual lanes. ESCAPE traffic routes on the deterministic up*/down*
// escape table and is never deflected; packets enter it only after a
// deflection exhausts their tokens. Control packets ride a separate
// strict-priority sub-queue and are never paused or marked.
enum class Lane : std::uint8_t { kEscape = 0, kDeflect = 1 };

enum class FlowClass : std::uint8_t { kShort = 0, kLong = 1 };

using MsgId = std::uint64_t;

struct Packet {
    PacketKind kind = PacketKind::kData;
    NodeId src = -1;
    NodeId dst = -1;
    MsgId msg_id = 0;
    std::uint32_t seq = 0;
    std::int32_t size_bytes = 0;  // on-wire size
    FlowClass cls = FlowClass::kShort;
    Lane lane = Lane::kDeflect;
    bool start = false;
    bool end = false;
    bool ecn_ce = false;            // marked congestion-experienced in-network
    bool ecn_echo = false;          // ACK: mark echoed back to the sender
    std::uint16_t piggyback_n = 1;  // ACK: receiver's active-sender count
    std::int8_t tokens = 0;         // remaining deflection budget
    std::int8_t hops = 0;
    std::int8_t deflections = 0;
    SimTime sent_at = 0;  // sender timestamp, echoed on the ACK
    // Look-ahead: start packets of an incast advertise the whole sender
    // list (borrowed from the schedule, which outlives the run).
    std::uint32_t group = 0;  // 0 = not part of an incast
    const std::vector<NodeId>* group_senders = nullptr;
};

struct Message {
    MsgId id = 0;
    NodeId src = -1;
    NodeId dst = -1;
    std::int64_t size_bytes = 0;
    FlowClass cls = FlowClass::kShort;
    SimTime start_time = 0;
    std::uint32_t group = 0;
};

}  // namespace dartsim
