#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "teleprobe/error.hpp"
#include "teleprobe/probe/envelope.hpp"

namespace teleprobe::probe {

/// Linear steps -> physical-unit map for a hysteresis-free axis.
struct LinearAxisMap {
    double steps_per_unit = 1.0;
    std::int64_t min_steps = 0;
    std::int64_t max_steps = 0;
    std::int64_t neutral_steps = 0;

    double to_units(std::int64_t steps) const noexcept {
        return static_cast<double>(steps - neutral_steps) / steps_per_unit;
    }
};

/// One shaft configuration: steering envelopes plus the linear axis maps.
struct Calibration {
    double steps_per_wheel_degree = 80.0;
    double rate_steps_per_s = 400.0;
    std::int64_t steering_neutral_steps = 3000;
    BacklashEnvelope steer_lr;
    BacklashEnvelope steer_ud;
    LinearAxisMap rotation{10.0, -1800, 1800, 0};   // steps per degree
    LinearAxisMap translation{100.0, 0, 6000, 0};   // steps per mm

    const BacklashEnvelope& envelope(bool lr) const noexcept { return lr ? steer_lr : steer_ud; }
};

namespace detail {

inline BacklashEnvelope parse_envelope(const nlohmann::json& j, const char* name) {
    try {
        auto grid = j.at("grid").get<std::vector<std::int64_t>>();
        auto asc = j.at("ascending_deg").get<std::vector<double>>();
        auto desc = j.at("descending_deg").get<std::vector<double>>();
        const auto zone = j.at("zone").get<std::vector<std::int64_t>>();
        if (zone.size() != 2) {
            throw calibration_error(std::string(name) + ": zone must be [lo, hi]");
        }
        return BacklashEnvelope(std::move(grid), std::move(asc), std::move(desc), zone[0], zone[1]);
    } catch (const calibration_error& e) {
        throw calibration_error(std::string(name) + ": " + e.what(), e.grid_index());
    } catch (const nlohmann::json::exception& e) {
        throw calibration_error(std::string(name) + ": " + e.what());
    }
}

inline LinearAxisMap parse_linear(const nlohmann::json& j, const char* unit_key, LinearAxisMap dflt) {
    LinearAxisMap m = dflt;
    m.steps_per_unit = j.at(unit_key).get<double>();
    m.min_steps = j.value("min_steps", dflt.min_steps);
    m.max_steps = j.value("max_steps", dflt.max_steps);
    m.neutral_steps = j.value("neutral_steps", dflt.neutral_steps);
    if (!(m.steps_per_unit > 0.0) || m.min_steps > m.max_steps || m.neutral_steps < m.min_steps ||
        m.neutral_steps > m.max_steps) {
        throw calibration_error(std::string("invalid linear axis map '") + unit_key + "'");
    }
    return m;
}

} // namespace detail

inline Calibration parse_calibration(const nlohmann::json& doc) {
    Calibration c;
    try {
        c.steps_per_wheel_degree = doc.at("steps_per_wheel_degree").get<double>();
        const auto& axes = doc.at("axes");
        c.steer_lr = detail::parse_envelope(axes.at("steer_lr"), "steer_lr");
        c.steer_ud = detail::parse_envelope(axes.at("steer_ud"), "steer_ud");
        c.rotation = detail::parse_linear(axes.at("rotation"), "steps_per_degree", c.rotation);
        c.translation = detail::parse_linear(axes.at("translation"), "steps_per_mm", c.translation);
        c.rate_steps_per_s = doc.value("rate_steps_per_s", c.rate_steps_per_s);
        if (doc.contains("steering")) {
            c.steering_neutral_steps = doc["steering"].value("neutral_steps", c.steering_neutral_steps);
        }
    } catch (const nlohmann::json::exception& e) {
        throw calibration_error(std::string("calibration: ") + e.what());
    }
    if (!(c.steps_per_wheel_degree > 0.0) || !(c.rate_steps_per_s > 0.0)) {
        throw calibration_error("calibration: rates must be positive");
    }
    if (c.steer_lr.min_steps() != c.steer_ud.min_steps() || c.steer_lr.max_steps() != c.steer_ud.max_steps()) {
        throw calibration_error("calibration: steering envelopes must span the same step range");
    }
    if (c.steering_neutral_steps < c.steer_lr.min_steps() || c.steering_neutral_steps > c.steer_lr.max_steps()) {
        throw calibration_error("calibration: steering neutral outside travel");
    }
    return c;
}

inline Calibration parse_calibration(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw calibration_error(std::string("calibration parse error: ") + e.what());
    }
    return parse_calibration(doc);
}

inline Calibration load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw calibration_error("cannot open calibration file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_calibration(ss.str());
}

} // namespace teleprobe::probe
