#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teleprobe/error.hpp"

namespace teleprobe::stats {

/// One averaged sweep: mean tip angle at each visited step position.
struct SweepRecord {
    int direction = +1;  // +1 ascending steps, -1 descending
    std::vector<std::pair<std::int64_t, double>> samples;
    int repeats = 1;
};

struct DeadbandResult {
    /// Reversal travel after climbing the ascending curve to each step position.
    std::vector<std::pair<std::int64_t, double>> gaps;
    double max_gap = 0.0;
    double neutral_gap = 0.0;
    double neutral_level_deg = 0.0;
    /// Span of chords whose gap reaches the zone threshold; empty zone -> lo > hi.
    double zone_lo = 0.0;
    double zone_hi = -1.0;
    std::vector<std::string> warnings;
};

/// Pool-adjacent-violators: least-squares non-decreasing fit.
inline std::vector<double> isotonic_increasing(const std::vector<double>& ys) {
    struct Block {
        double sum;
        std::size_t n;
    };
    std::vector<Block> blocks;
    for (double y : ys) {
        blocks.push_back({y, 1});
        while (blocks.size() >= 2) {
            const auto& b = blocks[blocks.size() - 1];
            const auto& a = blocks[blocks.size() - 2];
            if (a.sum / static_cast<double>(a.n) <= b.sum / static_cast<double>(b.n)) break;
            Block merged{a.sum + b.sum, a.n + b.n};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(ys.size());
    for (const auto& b : blocks) out.insert(out.end(), b.n, b.sum / static_cast<double>(b.n));
    return out;
}

namespace detail {

struct Curve {
    std::vector<double> s;
    std::vector<double> y;

    double at(double steps) const {
        if (steps <= s.front()) return y.front();
        if (steps >= s.back()) return y.back();
        auto it = std::upper_bound(s.begin(), s.end(), steps);
        const auto i = static_cast<std::size_t>(it - s.begin()) - 1;
        const double f = (steps - s[i]) / (s[i + 1] - s[i]);
        return y[i] + f * (y[i + 1] - y[i]);
    }

    // Smallest step where the curve reaches `level`.
    double first_reaching(double level) const {
        if (level <= y.front()) return s.front();
        for (std::size_t i = 1; i < y.size(); ++i) {
            if (y[i] >= level) return s[i - 1] + (level - y[i - 1]) / (y[i] - y[i - 1]) * (s[i] - s[i - 1]);
        }
        return s.back();
    }

    // Largest step where the curve is still at or below `level`.
    double last_below(double level) const {
        if (level >= y.back()) return s.back();
        for (std::size_t i = y.size() - 1; i-- > 0;) {
            if (y[i] <= level) return s[i] + (level - y[i]) / (y[i + 1] - y[i]) * (s[i + 1] - s[i]);
        }
        return s.front();
    }
};

inline Curve prepare(const SweepRecord& rec, const char* name, double noise_tol_deg,
                     std::vector<std::string>& warnings) {
    if (rec.samples.size() < 2) {
        throw stats_error(std::string(name) + " sweep needs at least two samples");
    }
    auto pts = rec.samples;
    std::sort(pts.begin(), pts.end());
    Curve c;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0 && pts[i].first == pts[i - 1].first) {
            throw stats_error(std::string(name) + " sweep repeats a step position");
        }
        c.s.push_back(static_cast<double>(pts[i].first));
        c.y.push_back(pts[i].second);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i < c.y.size(); ++i) worst = std::max(worst, c.y[i - 1] - c.y[i]);
    if (worst > noise_tol_deg) {
        warnings.push_back(std::string(name) + " sweep non-monotone by " + std::to_string(worst) +
                           " deg; applied monotone regression");
    }
    c.y = isotonic_increasing(c.y);
    return c;
}

} // namespace detail

/// Horizontal deadband between an ascending and a descending sweep.
///
/// Both curves are made non-decreasing first (pool-adjacent-violators); a
/// violation above `noise_tol_deg` is reported as a warning.
inline DeadbandResult extract_deadband(const SweepRecord& up, const SweepRecord& down, std::int64_t neutral_steps,
                                       double zone_threshold_steps = 100.0, double noise_tol_deg = 0.1) {
    DeadbandResult r;
    const auto asc = detail::prepare(up, "ascending", noise_tol_deg, r.warnings);
    const auto desc = detail::prepare(down, "descending", noise_tol_deg, r.warnings);
    if (asc.s.front() != desc.s.front() || asc.s.back() != desc.s.back()) {
        throw stats_error("sweeps must span the same step range");
    }

    bool in_zone_seen = false;
    for (std::size_t i = 0; i < asc.s.size(); ++i) {
        const double level = asc.y[i];
        const double gap = std::max(0.0, asc.s[i] - desc.last_below(level));
        r.gaps.emplace_back(static_cast<std::int64_t>(asc.s[i]), gap);
        r.max_gap = std::max(r.max_gap, gap);
        if (gap >= zone_threshold_steps) {
            r.zone_lo = in_zone_seen ? std::min(r.zone_lo, asc.s[i] - gap) : asc.s[i] - gap;
            r.zone_hi = in_zone_seen ? std::max(r.zone_hi, asc.s[i]) : asc.s[i];
            in_zone_seen = true;
        }
    }

    const auto n = static_cast<double>(neutral_steps);
    r.neutral_level_deg = 0.5 * (asc.at(n) + desc.at(n));
    r.neutral_gap = std::max(0.0, asc.first_reaching(r.neutral_level_deg) - desc.last_below(r.neutral_level_deg));
    return r;
}

} // namespace teleprobe::stats
