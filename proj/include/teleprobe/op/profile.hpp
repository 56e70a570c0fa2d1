#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "teleprobe/error.hpp"

namespace teleprobe::op {

/// Timing and decision parameters of one control condition.
struct OperatorProfile {
    std::string name;
    std::int64_t reaction_ms = 0;         // stimulus -> press/release
    std::int64_t reaction_jitter_ms = 0;  // extra uniform [0, jitter] per action
    std::int64_t decision_period_ms = 100;
    double stop_threshold_deg = 0.3;
    double anticipation_deg = 0.0;  // release lead while moving
    double fumble_prob = 0.0;       // chance a decision cycle is wasted

    void validate() const {
        if (reaction_ms < 0 || reaction_jitter_ms < 0 || decision_period_ms <= 0) {
            throw config_error("profile '" + name + "': latencies must be >= 0 and decision period > 0");
        }
        if (!(stop_threshold_deg > 0.0) || anticipation_deg < 0.0) {
            throw config_error("profile '" + name + "': stop threshold must be > 0, anticipation >= 0");
        }
        if (!(fumble_prob >= 0.0 && fumble_prob < 1.0)) {
            throw config_error("profile '" + name + "': fumble_prob must be in [0, 1)");
        }
    }
};

inline void to_json(nlohmann::json& j, const OperatorProfile& p) {
    j = nlohmann::json{{"name", p.name},
                       {"reaction_ms", p.reaction_ms},
                       {"reaction_jitter_ms", p.reaction_jitter_ms},
                       {"decision_period_ms", p.decision_period_ms},
                       {"stop_threshold_deg", p.stop_threshold_deg},
                       {"anticipation_deg", p.anticipation_deg},
                       {"fumble_prob", p.fumble_prob}};
}

inline void from_json(const nlohmann::json& j, OperatorProfile& p) {
    p.name = j.at("name").get<std::string>();
    p.reaction_ms = j.at("reaction_ms").get<std::int64_t>();
    p.reaction_jitter_ms = j.value("reaction_jitter_ms", std::int64_t{0});
    p.decision_period_ms = j.at("decision_period_ms").get<std::int64_t>();
    p.stop_threshold_deg = j.value("stop_threshold_deg", 0.3);
    p.anticipation_deg = j.value("anticipation_deg", 0.0);
    p.fumble_prob = j.value("fumble_prob", 0.0);
}

/// Manual, gamepad and joystick defaults, ordered by reaction latency.
inline std::map<std::string, OperatorProfile> builtin_profiles() {
    return {
        {"manual", {"manual", 120, 60, 50, 0.3, 0.2, 0.0}},
        {"gamepad", {"gamepad", 180, 90, 100, 0.3, 0.4, 0.02}},
        {"joystick", {"joystick", 250, 125, 100, 0.3, 0.6, 0.06}},
    };
}

inline OperatorProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open profile '" + path + "'");
    try {
        auto p = nlohmann::json::parse(in).get<OperatorProfile>();
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("profile '" + path + "': " + e.what());
    }
}

/// A built-in name or a path to a profile JSON file.
inline OperatorProfile resolve_profile(const std::string& name_or_path) {
    auto builtins = builtin_profiles();
    if (auto it = builtins.find(name_or_path); it != builtins.end()) return it->second;
    return load_profile(name_or_path);
}

} // namespace teleprobe::op
