#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "teleprobe/error.hpp"

namespace teleprobe::stats {

/// One telemetry sample with the operator's command state at that moment.
struct TracePoint {
    std::int64_t ts_ms = 0;
    double angle_deg = 0.0;
    int cmd_dir = 0;
    bool cmd_on = false;

    friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Metrics for one target-to-target movement.
struct SegmentRecord {
    double target_deg = 0.0;
    double start_deg = 0.0;
    double final_deg = 0.0;
    double error_deg = 0.0;
    double max_overshoot_deg = 0.0;
    double duration_s = 0.0;
    int reversal_in_deadband_count = 0;
    bool aborted = false;
    std::vector<TracePoint> trace;
};

struct SegmentWindow {
    std::int64_t start_ms = 0;
    /// Settle time; the last sample's timestamp when unset.
    std::optional<std::int64_t> settle_ms;
    /// A target this close to the start angle counts as "no move needed".
    double still_band_deg = 0.3;
};

/// Largest signed excursion past `target` in the initial direction of travel.
inline double max_overshoot(std::span<const TracePoint> trace, double target, double still_band_deg) {
    if (trace.empty()) throw stats_error("overshoot of an empty trace");
    const double start = trace.front().angle_deg;
    if (std::fabs(target - start) <= still_band_deg) return 0.0;
    const double dir = target > start ? 1.0 : -1.0;
    double worst = 0.0;
    for (const auto& p : trace) worst = std::max(worst, dir * (p.angle_deg - target));
    return worst;
}

/// Reversals the operator issued before the previous reversal had produced
/// visible motion. Fallback when no simulator ground truth is available.
inline int estimate_deadband_reversals(std::span<const TracePoint> trace, double motion_deg = 0.2) {
    int count = 0;
    int last_on_dir = 0;
    double angle_at_reversal = 0.0;
    bool waiting = false;
    bool prev_on = false;
    int prev_dir = 0;
    for (const auto& p : trace) {
        if (waiting && std::fabs(p.angle_deg - angle_at_reversal) > motion_deg) waiting = false;
        const bool edge = p.cmd_on && (!prev_on || p.cmd_dir != prev_dir);
        if (edge) {
            if (last_on_dir != 0 && p.cmd_dir != last_on_dir) {
                if (waiting) ++count;
                waiting = true;
                angle_at_reversal = p.angle_deg;
            }
            last_on_dir = p.cmd_dir;
        }
        prev_on = p.cmd_on;
        prev_dir = p.cmd_dir;
    }
    return count;
}

/// Error, overshoot and duration of one segment. The reversal count is the
/// trace-based estimate; callers with simulator ground truth overwrite it.
inline SegmentRecord segment_metrics(std::span<const TracePoint> trace, double target_deg, const SegmentWindow& w) {
    if (trace.empty()) throw stats_error("segment metrics of an empty trace");
    SegmentRecord r;
    r.target_deg = target_deg;
    r.start_deg = trace.front().angle_deg;
    r.final_deg = trace.back().angle_deg;
    r.error_deg = std::fabs(r.final_deg - target_deg);
    r.max_overshoot_deg = max_overshoot(trace, target_deg, w.still_band_deg);
    const std::int64_t end = w.settle_ms.value_or(trace.back().ts_ms);
    r.duration_s = static_cast<double>(end - w.start_ms) / 1000.0;
    r.reversal_in_deadband_count = estimate_deadband_reversals(trace);
    r.trace.assign(trace.begin(), trace.end());
    return r;
}

} // namespace teleprobe::stats
