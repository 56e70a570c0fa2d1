#pragma once

#include <algorithm>
#include <cstdint>

#include "teleprobe/probe/envelope.hpp"

namespace teleprobe::probe {

/// Play-operator memory for one steering axis: the current tip angle.
struct HysteresisState {
    double tip_deg = 0.0;

    friend bool operator==(const HysteresisState&, const HysteresisState&) = default;
};

/// Memory for a fresh axis: midpoint of the two branches at `steps`.
inline HysteresisState initial_hysteresis(const BacklashEnvelope& env, std::int64_t steps) {
    const auto s = static_cast<double>(steps);
    return {0.5 * (env.ascending(s) + env.descending(s))};
}

/// Moves the play operator to step position `new_steps`. The output is clamped
/// between the branches and otherwise held, so reversals inside the deadband
/// leave the tip where it was. Throws range_error outside the grid.
inline HysteresisState play_update(const BacklashEnvelope& env, HysteresisState mem, std::int64_t new_steps) {
    const auto s = static_cast<double>(new_steps);
    const double lo = env.ascending(s);
    const double hi = env.descending(s);
    return {std::min(hi, std::max(lo, mem.tip_deg))};
}

/// Tip strictly between the branches, i.e. the output is disengaged from both.
inline bool inside_deadband(const BacklashEnvelope& env, HysteresisState mem, std::int64_t steps) {
    const auto s = static_cast<double>(steps);
    return mem.tip_deg > env.ascending(s) + BacklashEnvelope::coincide_tol &&
           mem.tip_deg < env.descending(s) - BacklashEnvelope::coincide_tol;
}

} // namespace teleprobe::probe
