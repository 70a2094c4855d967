#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "dartsim/time.hpp"

namespace dartsim {

// Deterministic discrete-event core. Events fire in (fire_at, insertion
// sequence) order, so ties resolve by schedule order and a run is a pure
// function of its inputs.
class Engine {
public:
    using Handle = std::uint64_t;

    // fire_at must be >= now(); scheduling into the past is a logic error.
    Handle schedule(SimTime fire_at, std::function<void()> fn);

    // Cancelled events never fire. Only pending handles may be cancelled.
    void cancel(Handle h);

    SimTime now() const { return now_; }
    bool empty() const { return heap_.size() == cancelled_.size(); }
    std::size_t pending() const { return heap_.size() - cancelled_.size(); }

    // Executes every event with fire_at <= end. Returns the clock at stop:
    // end, unless the queue exhausts earlier (clock of last executed event)
    // or request_stop() was called from inside an event.
    SimTime run_until(SimTime end);

    void request_stop() { stop_requested_ = true; }
    bool stop_requested() const { return stop_requested_; }

private:
    struct Item {
        SimTime at;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    // Min-heap on (at, seq) via std::*_heap with an inverted comparison.
    static bool later(const Item& a, const Item& b) {
        return a.at > b.at || (a.at == b.at && a.seq > b.seq);
    }

    std::vector<Item> heap_;
    std::unordered_set<Handle> cancelled_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    bool stop_requested_ = false;
};

}  // namespace dartsim
