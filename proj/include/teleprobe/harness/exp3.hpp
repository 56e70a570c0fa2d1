#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "teleprobe/harness/rig.hpp"
#include "teleprobe/harness/seed.hpp"
#include "teleprobe/op/client.hpp"
#include "teleprobe/op/profile.hpp"
#include "teleprobe/op/script.hpp"
#include "teleprobe/op/target_task.hpp"
#include "teleprobe/stats/descriptive.hpp"
#include "teleprobe/stats/welch.hpp"

namespace teleprobe::harness {

/// One control condition: an operator profile and the link it operates over.
struct Condition {
    op::OperatorProfile profile;
    net::Mode mode = net::Mode::STA;
    std::string preset = "5g";
};

/// Manual runs on the direct link without network delay; the two remote
/// devices go through the relay on the 5g preset.
inline std::vector<Condition> default_conditions() {
    auto p = op::builtin_profiles();
    return {{p.at("manual"), net::Mode::AP, "none"},
            {p.at("gamepad"), net::Mode::STA, "5g"},
            {p.at("joystick"), net::Mode::STA, "5g"}};
}

inline constexpr int participants_per_cell = 3;
inline constexpr int trials_per_participant = 3;

/// Simulated participant: the condition's profile with reaction time scaled
/// by a per-participant factor in [0.85, 1.15].
inline op::OperatorProfile participant_profile(const op::OperatorProfile& base, std::uint64_t seed, int participant) {
    std::mt19937_64 rng(derive_seed(seed, {0x5041525449ull, static_cast<std::uint64_t>(participant)}));
    const double f = std::uniform_real_distribution<double>(0.85, 1.15)(rng);
    auto p = base;
    p.reaction_ms = static_cast<std::int64_t>(static_cast<double>(base.reaction_ms) * f + 0.5);
    p.reaction_jitter_ms = static_cast<std::int64_t>(static_cast<double>(base.reaction_jitter_ms) * f + 0.5);
    return p;
}

struct TrialResult {
    std::vector<stats::SegmentRecord> records;
    bool aborted = false;
    std::int64_t virtual_ms = 0;
};

/// One participant working through one script on a fresh rig.
inline TrialResult run_trial(const probe::Calibration& cal, const Condition& cond, const op::OperatorProfile& profile,
                             const op::TargetScript& script, std::uint64_t seed, bool wall_clock = false) {
    RigOptions ro;
    ro.wall_clock = wall_clock;
    ro.mode = cond.mode;
    ro.impairment = net::impairment_preset(cond.preset, derive_seed(seed, {1}));
    ro.imu_seed = derive_seed(seed, {2});
    SimRig rig(cal, ro);
    auto conn = rig.connect();
    op::OperatorClient client(rig.clock(), conn, {});
    client.start();
    op::TargetTaskRunner runner(rig.clock(), client, profile, script, derive_seed(seed, {3}));
    const auto axis = script.axis;
    auto& robot = rig.robot();
    runner.set_reversal_counter([&robot, axis](net::Micros from, net::Micros to) {
        int n = 0;
        for (const auto& a : robot.applied_commands()) {
            if (a.cmd.axis == axis && a.reversal_in_zone && a.at_us >= from && a.at_us < to) ++n;
        }
        return n;
    });
    runner.start();
    const auto limit = net::ms_to_us(15.0 * 60.0 * 1000.0);
    rig.clock().run_while_not([&] { return runner.done(); }, limit);
    TrialResult r;
    r.records = runner.records();
    r.aborted = runner.aborted() || !runner.done();
    r.virtual_ms = rig.clock().now_ms();
    client.stop();
    return r;
}

struct SegmentRow {
    std::uint64_t seed = 0;
    int participant = 0;
    int trial = 0;
    int index = 0;
    stats::SegmentRecord record;
};

/// All segments of one condition on one axis.
struct Exp3Cell {
    std::string condition;
    probe::AxisId axis = probe::AxisId::SteerLR;
    std::vector<SegmentRow> rows;

    std::vector<double> values(double stats::SegmentRecord::*field) const {
        std::vector<double> v;
        for (const auto& r : rows) {
            if (!r.record.aborted) v.push_back(r.record.*field);
        }
        return v;
    }
    std::size_t aborted() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.record.aborted ? 1 : 0;
        return n;
    }
    double mean_reversals() const {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows) {
            if (r.record.aborted) continue;
            sum += r.record.reversal_in_deadband_count;
            ++n;
        }
        return n ? sum / static_cast<double>(n) : 0.0;
    }
    /// Segments recorded for `seed`, aborted included.
    std::size_t count_for_seed(std::uint64_t seed) const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.seed == seed ? 1 : 0;
        return n;
    }
};

struct Exp3Result {
    std::vector<std::uint64_t> seeds;
    std::vector<Exp3Cell> cells;

    const Exp3Cell* cell(const std::string& condition, probe::AxisId axis) const {
        for (const auto& c : cells) {
            if (c.condition == condition && c.axis == axis) return &c;
        }
        return nullptr;
    }
};

using TrialObserver = std::function<void(const Exp3Cell&, std::uint64_t seed, int participant, int trial,
                                         const TrialResult&)>;

/// Every condition x script: participants x trials per seed, all on fresh rigs.
inline Exp3Result run_exp3(const probe::Calibration& cal, const std::vector<Condition>& conditions,
                           const std::vector<op::TargetScript>& scripts, const std::vector<std::uint64_t>& seeds,
                           const TrialObserver& observer = {}, bool wall_clock = false) {
    if (conditions.empty() || scripts.empty() || seeds.empty()) {
        throw config_error("exp3 needs at least one condition, script and seed");
    }
    for (const auto& sc : scripts) op::validate_script(sc, cal);
    Exp3Result out;
    out.seeds = seeds;
    for (const auto& cond : conditions) {
        for (const auto& sc : scripts) {
            Exp3Cell cell;
            cell.condition = cond.profile.name;
            cell.axis = sc.axis;
            for (auto seed : seeds) {
                for (int p = 0; p < participants_per_cell; ++p) {
                    const auto prof = participant_profile(cond.profile, seed, p);
                    for (int t = 0; t < trials_per_participant; ++t) {
                        // Shared across conditions (common random numbers).
                        const auto trial_seed =
                            derive_seed(seed, {static_cast<std::uint64_t>(sc.axis), static_cast<std::uint64_t>(p),
                                               static_cast<std::uint64_t>(t)});
                        auto tr = run_trial(cal, cond, prof, sc, trial_seed, wall_clock);
                        for (std::size_t i = 0; i < tr.records.size(); ++i) {
                            cell.rows.push_back({seed, p, t, static_cast<int>(i), tr.records[i]});
                        }
                        if (observer) observer(cell, seed, p, t, tr);
                    }
                }
            }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

struct CellSummary {
    std::size_t n = 0;
    std::size_t aborted = 0;
    stats::StatsSummary error;
    stats::StatsSummary overshoot;
    stats::StatsSummary time;
    double mean_reversals = 0.0;
};

inline CellSummary summarize(const Exp3Cell& c) {
    CellSummary s;
    s.n = c.rows.size() - c.aborted();
    s.aborted = c.aborted();
    if (s.n == 0) throw stats_error("cell " + c.condition + " has no completed segments");
    s.error = stats::descriptive(c.values(&stats::SegmentRecord::error_deg));
    s.overshoot = stats::descriptive(c.values(&stats::SegmentRecord::max_overshoot_deg));
    s.time = stats::descriptive(c.values(&stats::SegmentRecord::duration_s));
    s.mean_reversals = c.mean_reversals();
    return s;
}

struct WelchRow {
    probe::AxisId axis;
    std::string a;
    std::string b;
    std::optional<stats::WelchResult> result;  // empty when undefined
};

/// Welch's t-test on segment times between every pair of conditions, per axis.
inline std::vector<WelchRow> welch_table(const Exp3Result& r) {
    std::vector<WelchRow> rows;
    std::vector<probe::AxisId> axes;
    std::vector<std::string> conds;
    for (const auto& c : r.cells) {
        if (std::find(axes.begin(), axes.end(), c.axis) == axes.end()) axes.push_back(c.axis);
        if (std::find(conds.begin(), conds.end(), c.condition) == conds.end()) conds.push_back(c.condition);
    }
    for (auto axis : axes) {
        for (std::size_t i = 0; i < conds.size(); ++i) {
            for (std::size_t j = i + 1; j < conds.size(); ++j) {
                const auto* ca = r.cell(conds[i], axis);
                const auto* cb = r.cell(conds[j], axis);
                if (!ca || !cb) continue;
                WelchRow w{axis, conds[i], conds[j], std::nullopt};
                try {
                    w.result = stats::welch_t_test(ca->values(&stats::SegmentRecord::duration_s),
                                                   cb->values(&stats::SegmentRecord::duration_s));
                } catch (const stats_error&) {
                }
                rows.push_back(std::move(w));
            }
        }
    }
    return rows;
}

} // namespace teleprobe::harness
