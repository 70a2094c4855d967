#include "dartsim/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dartsim {

Engine::Handle Engine::schedule(SimTime fire_at, std::function<void()> fn) {
    if (fire_at < now_) {
        throw std::logic_error("event scheduled into the past: fire_at=" +
                               std::to_string(fire_at) + " now=" + std::to_string(now_));
    }
    Handle h = ++next_seq_;
    heap_.push_back(Item{fire_at, h, std::move(fn)});
    std::push_heap(heap_.begin(), heap_.end(), later);
    return h;
}

void Engine::cancel(Handle h) {
    cancelled_.insert(h);
}

SimTime Engine::run_until(SimTime end) {
    stop_requested_ = false;
    while (!heap_.empty()) {
        if (stop_requested_) return now_;
        if (heap_.front().at > end) {
            now_ = end;
            return now_;
        }
        std::pop_heap(heap_.begin(), heap_.end(), later);
        Item it = std::move(heap_.back());
        heap_.pop_back();
        if (!cancelled_.empty()) {
            auto c = cancelled_.find(it.seq);
            if (c != cancelled_.end()) {
                cancelled_.erase(c);
                continue;
            }
        }
        now_ = it.at;
        it.fn();
    }
    return now_;
}

}  // namespace dartsim
