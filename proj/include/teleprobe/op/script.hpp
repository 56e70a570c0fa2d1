#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleprobe/error.hpp"
#include "teleprobe/probe/axis.hpp"
#include "teleprobe/probe/calibration.hpp"

namespace teleprobe::op {

inline constexpr std::size_t targets_per_script = 10;
inline constexpr double small_move_deg = 2.0;

struct TargetScript {
    probe::AxisId axis = probe::AxisId::SteerLR;
    std::vector<double> targets_deg;
    double tolerance_deg = 0.3;
};

/// How one scripted move relates to the backlash envelope, judged on an
/// ideal (zero-latency) plant.
struct MoveClass {
    double from_deg = 0.0;
    double to_deg = 0.0;
    bool small = false;             // |move| < 2 deg
    bool crosses_neutral = false;   // start and target on opposite sides of the neutral tip level
    bool reversal = false;
    double reversal_gap_steps = 0.0;   // deadband to traverse before the output moves
    double nominal_steps = 0.0;        // branch travel the move itself needs
    bool reversal_inside = false;   // reversal with nominal travel shorter than the deadband
    bool reversal_outside = false;  // any other reversal, including where there is no deadband
};

/// Classifies each move of `targets` starting from tip `start_deg` at `start_steps`.
inline std::vector<MoveClass> classify_moves(const probe::BacklashEnvelope& env, double neutral_level_deg,
                                             std::int64_t start_steps, double start_deg,
                                             const std::vector<double>& targets) {
    std::vector<MoveClass> out;
    double s = static_cast<double>(start_steps);
    double tip = start_deg;
    int last_dir = 0;
    for (double t : targets) {
        MoveClass m;
        m.from_deg = tip;
        m.to_deg = t;
        m.small = std::fabs(t - tip) < small_move_deg;
        m.crosses_neutral = (tip - neutral_level_deg) * (t - neutral_level_deg) < 0.0;
        const int dir = t > tip ? 1 : (t < tip ? -1 : 0);
        if (dir == 0) {
            out.push_back(m);
            continue;
        }
        double s_engage = 0.0;
        double s_new = 0.0;
        if (dir > 0) {
            s_engage = std::max(s, env.ascending_inverse(tip));
            s_new = env.ascending_inverse(t);
        } else {
            s_engage = std::min(s, env.descending_inverse(tip));
            s_new = env.descending_inverse(t);
        }
        m.reversal_gap_steps = std::fabs(s_engage - s);
        m.nominal_steps = std::fabs(s_new - s_engage);
        if (last_dir != 0 && dir != last_dir) {
            m.reversal = true;
            m.reversal_inside = m.reversal_gap_steps > 0.0 && m.nominal_steps < m.reversal_gap_steps;
            m.reversal_outside = !m.reversal_inside;
        }
        s = s_new;
        tip = t;
        last_dir = dir;
        out.push_back(m);
    }
    return out;
}

/// Checks the structural and category invariants against `cal`. Throws config_error.
inline void validate_script(const TargetScript& sc, const probe::Calibration& cal) {
    if (!probe::is_steering(sc.axis)) throw config_error("target script axis must be LR or UD");
    if (sc.targets_deg.size() != targets_per_script) {
        throw config_error("target script needs exactly 10 targets, got " + std::to_string(sc.targets_deg.size()));
    }
    if (!(sc.tolerance_deg > 0.0)) throw config_error("target script tolerance must be > 0");
    const bool lr = sc.axis == probe::AxisId::SteerLR;
    const auto& env = cal.envelope(lr);
    const double lo = env.ascending(static_cast<double>(env.grid().front()));
    const double hi = env.descending(static_cast<double>(env.grid().back()));
    for (std::size_t i = 0; i < sc.targets_deg.size(); ++i) {
        const double t = sc.targets_deg[i];
        if (!std::isfinite(t) || t <= lo || t >= hi) {
            throw config_error("target " + std::to_string(i) + " (" + std::to_string(t) + " deg) is not reachable");
        }
    }
    const auto n = cal.steering_neutral_steps;
    const double start = 0.5 * (env.ascending(static_cast<double>(n)) + env.descending(static_cast<double>(n)));
    const auto moves = classify_moves(env, start, n, start, sc.targets_deg);
    bool small = false, cross = false, rin = false, rout = false;
    for (const auto& m : moves) {
        small |= m.small;
        cross |= m.crosses_neutral;
        rin |= m.reversal_inside;
        rout |= m.reversal_outside;
    }
    if (!small) throw config_error("target script lacks a small (< 2 deg) adjustment");
    if (!cross) throw config_error("target script lacks a move through the hysteresis zone");
    if (!rin) throw config_error("target script lacks a reversal inside the deadband");
    if (!rout) throw config_error("target script lacks a reversal outside the deadband");
}

/// Built-in scripts for the default calibration. U-D packs its in-zone
/// reversals around neutral and leaves the zone at both ends.
inline TargetScript default_target_script(probe::AxisId axis) {
    if (axis == probe::AxisId::SteerLR) {
        return {axis, {10.0, 11.5, 20.0, 28.0, 22.0, 14.0, 6.0, -2.0, -8.0, 24.0}, 0.3};
    }
    if (axis == probe::AxisId::SteerUD) {
        return {axis, {6.0, 7.5, 3.0, -4.0, -1.0, -6.0, -40.0, -38.5, 40.0, 38.5}, 0.3};
    }
    throw config_error("no default script for a non-steering axis");
}

inline void to_json(nlohmann::json& j, const TargetScript& s) {
    j = nlohmann::json{{"axis", std::string(probe::wire_code(s.axis))},
                       {"targets_deg", s.targets_deg},
                       {"tolerance_deg", s.tolerance_deg}};
}

inline void from_json(const nlohmann::json& j, TargetScript& s) {
    const auto code = j.at("axis").get<std::string>();
    const auto a = probe::axis_from_wire(code);
    if (!a) throw config_error("unknown axis '" + code + "'");
    s.axis = *a;
    s.targets_deg = j.at("targets_deg").get<std::vector<double>>();
    s.tolerance_deg = j.value("tolerance_deg", 0.3);
}

inline TargetScript load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open target script '" + path + "'");
    try {
        return nlohmann::json::parse(in).get<TargetScript>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("target script '" + path + "': " + e.what());
    }
}

/// `lr_default`, `ud_default`, or a path to a script JSON file.
inline TargetScript resolve_script(const std::string& name_or_path) {
    if (name_or_path == "lr_default") return default_target_script(probe::AxisId::SteerLR);
    if (name_or_path == "ud_default") return default_target_script(probe::AxisId::SteerUD);
    return load_script(name_or_path);
}

} // namespace teleprobe::op
