#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "seaflow/core/time.hpp"

namespace seaflow {

/**
 * VirtualScheduler - deterministic discrete-event clock.
 *
 * Events fire in (time, insertion order). Time only moves inside run_until,
 * so callbacks that schedule at the current instant run in the same pass.
 */
class VirtualScheduler {
public:
    explicit VirtualScheduler(TimestampMs start = 0) : now_(start) {}

    void at(TimestampMs t, std::function<void()> fn) {
        if (t < now_) t = now_;
        queue_.push(Event{t, seq_++, std::move(fn)});
    }
    void after(std::int64_t delay_ms, std::function<void()> fn) {
        at(now_ + delay_ms, std::move(fn));
    }

    /// Runs every event with fire time <= t, then sets now to t.
    void run_until(TimestampMs t) {
        while (!queue_.empty() && queue_.top().at <= t) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            ev.fn();
        }
        now_ = t;
    }

    /// Drains the queue regardless of fire time; returns the last fire time.
    TimestampMs run_all() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            ev.fn();
        }
        return now_;
    }

    TimestampMs now() const { return now_; }
    bool idle() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }

private:
    struct Event {
        TimestampMs at;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Event& o) const {
            if (at != o.at) return at > o.at;
            return seq > o.seq;
        }
    };
    TimestampMs now_;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
};

}  // namespace seaflow
