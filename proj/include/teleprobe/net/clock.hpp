#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace teleprobe::net {

using Micros = std::int64_t;

constexpr Micros ms_to_us(double ms) noexcept { return static_cast<Micros>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5)); }

using TimerId = std::uint64_t;

/// Time source plus one-shot timers. Implemented by VirtualClock (tests,
/// experiments) and by the poll loop (interactive services).
class Clock {
public:
    virtual ~Clock() = default;
    virtual Micros now_us() const = 0;
    virtual TimerId call_at(Micros when, std::function<void()> fn) = 0;
    virtual void cancel(TimerId id) = 0;

    std::int64_t now_ms() const { return now_us() / 1000; }
    TimerId call_after(Micros delay, std::function<void()> fn) { return call_at(now_us() + delay, std::move(fn)); }
};

/// A clock the caller can run: dispatches events until `done()` holds or
/// time passes `limit`. Returns done().
class DrivableClock : public Clock {
public:
    virtual bool run_while_not(const std::function<bool()>& done, Micros limit) = 0;
    virtual void run_for(Micros dt) = 0;
};

/// Discrete-event clock. Events at equal times run in scheduling order, so a
/// run is fully determined by its inputs.
class VirtualClock final : public DrivableClock {
public:
    Micros now_us() const override { return now_; }

    TimerId call_at(Micros when, std::function<void()> fn) override {
        const TimerId id = ++next_id_;
        queue_.push(Event{when < now_ ? now_ : when, id, std::move(fn)});
        return id;
    }

    void cancel(TimerId id) override { cancelled_.insert(id); }

    /// Runs one event; false when the queue is empty.
    bool step() {
        while (!queue_.empty()) {
            Event ev = std::move(const_cast<Event&>(queue_.top()));
            queue_.pop();
            if (cancelled_.erase(ev.id) != 0) {
                continue;
            }
            now_ = ev.when;
            ev.fn();
            return true;
        }
        return false;
    }

    /// Runs every event due at or before `t`, then sets the clock to `t`.
    void run_until(Micros t) {
        while (!queue_.empty() && queue_.top().when <= t && !stopped_) {
            step();
        }
        if (!stopped_ && now_ < t) {
            now_ = t;
        }
    }

    void run_for(Micros dt) override { run_until(now_ + dt); }

    /// Runs until `done()` holds, the queue drains, or `limit` is passed.
    bool run_while_not(const std::function<bool()>& done, Micros limit) override {
        while (!done()) {
            if (queue_.empty() || queue_.top().when > limit || stopped_) {
                return done();
            }
            step();
        }
        return true;
    }

    void stop() noexcept { stopped_ = true; }
    bool stopped() const noexcept { return stopped_; }
    std::size_t pending() const noexcept { return queue_.size(); }

private:
    struct Event {
        Micros when;
        TimerId id;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const noexcept {
            return a.when != b.when ? a.when > b.when : a.id > b.id;
        }
    };

    Micros now_ = 0;
    TimerId next_id_ = 0;
    bool stopped_ = false;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::unordered_set<TimerId> cancelled_;
};

} // namespace teleprobe::net
