#pragma once

#include <array>
#include <cstdint>

#include "teleprobe/probe/axis.hpp"
#include "teleprobe/probe/calibration.hpp"
#include "teleprobe/probe/hysteresis.hpp"

namespace teleprobe::probe {

/// Complete plant state. Everything observable about the probe is a function
/// of this value and the calibration.
struct ProbeState {
    std::array<MotorAxis, 4> axes{};
    HysteresisState lr{};
    HysteresisState ud{};
    std::int64_t clock_ms = 0;

    MotorAxis& axis(AxisId a) noexcept { return axes[index(a)]; }
    const MotorAxis& axis(AxisId a) const noexcept { return axes[index(a)]; }

    friend bool operator==(const ProbeState&, const ProbeState&) = default;
};

struct TipPose {
    double roll_deg = 0.0;
    double pitch_deg = 0.0;  // U-D bend
    double yaw_deg = 0.0;    // L-R bend
    double insertion_mm = 0.0;

    friend bool operator==(const TipPose&, const TipPose&) = default;
};

/// All axes at neutral, steering memories at the branch midpoint.
inline ProbeState initial_state(const Calibration& cal) {
    ProbeState st;
    auto setup = [&](AxisId a, std::int64_t lo, std::int64_t hi, std::int64_t pos) {
        MotorAxis& m = st.axis(a);
        m.min_steps = lo;
        m.max_steps = hi;
        m.position_steps = pos;
        m.rate_steps_per_s = cal.rate_steps_per_s;
    };
    setup(AxisId::Translation, cal.translation.min_steps, cal.translation.max_steps, cal.translation.neutral_steps);
    setup(AxisId::Rotation, cal.rotation.min_steps, cal.rotation.max_steps, cal.rotation.neutral_steps);
    setup(AxisId::SteerLR, cal.steer_lr.min_steps(), cal.steer_lr.max_steps(), cal.steering_neutral_steps);
    setup(AxisId::SteerUD, cal.steer_ud.min_steps(), cal.steer_ud.max_steps(), cal.steering_neutral_steps);
    st.lr = initial_hysteresis(cal.steer_lr, cal.steering_neutral_steps);
    st.ud = initial_hysteresis(cal.steer_ud, cal.steering_neutral_steps);
    return st;
}

/// On/off edge for one axis; takes effect from the next advance.
inline ProbeState apply_axis_command(ProbeState st, AxisId axis, int dir, bool on) {
    st.axis(axis).engage(dir, on);
    return st;
}

inline ProbeState all_off(ProbeState st) {
    for (auto& m : st.axes) {
        m.engage(0, false);
    }
    return st;
}

/// Moves every engaged axis for `dt_ms` and updates the steering memories.
inline ProbeState advance(const Calibration& cal, ProbeState st, std::int64_t dt_ms) {
    if (dt_ms <= 0) {
        return st;
    }
    for (auto& m : st.axes) {
        m.advance(dt_ms);
    }
    // Direction is constant within one advance, so only the end position matters.
    st.lr = play_update(cal.steer_lr, st.lr, st.axis(AxisId::SteerLR).position_steps);
    st.ud = play_update(cal.steer_ud, st.ud, st.axis(AxisId::SteerUD).position_steps);
    st.clock_ms += dt_ms;
    return st;
}

inline TipPose tip_pose(const Calibration& cal, const ProbeState& st) {
    return {cal.rotation.to_units(st.axis(AxisId::Rotation).position_steps), st.ud.tip_deg, st.lr.tip_deg,
            cal.translation.to_units(st.axis(AxisId::Translation).position_steps)};
}

} // namespace teleprobe::probe
