#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "teleprobe/error.hpp"
#include "teleprobe/net/clock.hpp"

namespace teleprobe::net {

/// One-way link impairment. Commands are delayed but never dropped;
/// telemetry may be dropped.
struct ImpairmentModel {
    double base_delay_ms = 0.0;
    double jitter_ms = 0.0;  // uniform in [-jitter, +jitter]
    double telemetry_drop_prob = 0.0;
    std::uint64_t seed = 0;

    bool is_zero() const noexcept { return base_delay_ms == 0.0 && jitter_ms == 0.0 && telemetry_drop_prob == 0.0; }

    void validate() const {
        if (!(base_delay_ms >= 0.0) || !(jitter_ms >= 0.0) || !(telemetry_drop_prob >= 0.0) ||
            !(telemetry_drop_prob < 1.0)) {
            throw config_error("impairment parameters out of range");
        }
    }
};

inline ImpairmentModel impairment_preset(std::string_view name, std::uint64_t seed = 0) {
    if (name == "none" || name == "zero") return {0.0, 0.0, 0.0, seed};
    if (name == "lan") return {0.5, 0.2, 0.0, seed};
    if (name == "5g") return {20.0, 10.0, 0.001, seed};
    throw config_error("unknown impairment preset '" + std::string(name) + "'");
}

/// Telemetry lines are the only droppable traffic. Encoded frames always lead
/// with the discriminator, so a prefix test suffices.
inline bool is_telemetry_line(std::string_view line) noexcept { return line.starts_with("{\"t\":\"imu\""); }

/// Scheduling state for one direction of an impaired link.
///
/// Dispatch time is max(now + delay, previous dispatch): jitter stretches
/// the queue but never reorders it.
class ImpairedDirection {
public:
    ImpairedDirection() : ImpairedDirection(ImpairmentModel{}) {}
    explicit ImpairedDirection(ImpairmentModel m) : model_(m), rng_(m.seed) { model_.validate(); }

    /// Dispatch time for a frame handed over at `now`, or nullopt if dropped.
    std::optional<Micros> schedule(Micros now, bool telemetry) {
        if (telemetry && model_.telemetry_drop_prob > 0.0) {
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < model_.telemetry_drop_prob) {
                ++dropped_;
                return std::nullopt;
            }
        }
        double delay_ms = model_.base_delay_ms;
        if (model_.jitter_ms > 0.0) {
            delay_ms += std::uniform_real_distribution<double>(-model_.jitter_ms, model_.jitter_ms)(rng_);
        }
        const Micros at = std::max(now + ms_to_us(std::max(0.0, delay_ms)), last_dispatch_);
        last_dispatch_ = at;
        ++forwarded_;
        return at;
    }

    Micros last_dispatch() const noexcept { return last_dispatch_; }
    std::uint64_t forwarded() const noexcept { return forwarded_; }
    std::uint64_t dropped() const noexcept { return dropped_; }
    const ImpairmentModel& model() const noexcept { return model_; }

private:
    ImpairmentModel model_;
    std::mt19937_64 rng_;
    Micros last_dispatch_ = 0;
    std::uint64_t forwarded_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace teleprobe::net
