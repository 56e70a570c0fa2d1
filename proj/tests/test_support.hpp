#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "teleprobe/probe/calibration.hpp"

namespace test_support {

inline std::string source_path(const std::string& rel) { return std::string(TELEPROBE_SOURCE_DIR) + "/" + rel; }

inline const teleprobe::probe::Calibration& default_calibration() {
    static const auto cal = teleprobe::probe::load_calibration(source_path("calib/default.json"));
    return cal;
}

/// Independent piecewise-linear lookup on raw calibration arrays; shares no
/// code with BacklashEnvelope.
inline double lerp_table(const std::vector<std::int64_t>& grid, const std::vector<double>& ys, double s) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double x0 = static_cast<double>(grid[i]);
        const double x1 = static_cast<double>(grid[i + 1]);
        if (s >= x0 && s <= x1) return ys[i] + (ys[i + 1] - ys[i]) * (s - x0) / (x1 - x0);
    }
    return s < static_cast<double>(grid.front()) ? ys.front() : ys.back();
}

/// Brute-force play operator: walks one motor step at a time from `from` to
/// `to`, clamping between the branches at every intermediate position.
inline double replay_single_steps(const teleprobe::probe::BacklashEnvelope& env, double tip, std::int64_t from,
                                  std::int64_t to) {
    const auto& g = env.grid();
    const auto& a = env.ascending_samples();
    const auto& d = env.descending_samples();
    const std::int64_t step = to >= from ? 1 : -1;
    for (std::int64_t s = from; s != to + step; s += step) {
        const double lo = lerp_table(g, a, static_cast<double>(s));
        const double hi = lerp_table(g, d, static_cast<double>(s));
        tip = std::min(hi, std::max(lo, tip));
        if (s == to) break;
    }
    return tip;
}

} // namespace test_support
