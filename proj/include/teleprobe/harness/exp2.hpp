#pragma once

#include <chrono>
#include <cstdint>
#include <thread>
#include <map>
#include <vector>

#include "teleprobe/error.hpp"
#include "teleprobe/probe/imu.hpp"
#include "teleprobe/probe/probe.hpp"
#include "teleprobe/stats/deadband.hpp"

namespace teleprobe::harness {

struct Exp2Options {
    std::int64_t interval_steps = 400;
    std::int64_t dwell_ms = 500;
    int repeats = 3;
    std::int64_t tick_ms = 5;
    double imu_sigma_deg = probe::ImuEmulator::default_sigma_deg;
    std::uint64_t imu_seed = 1;
    /// Sleep through each tick so the sweep takes real time.
    bool wall_clock = false;
};

struct AxisSweep {
    probe::AxisId axis = probe::AxisId::SteerLR;
    stats::SweepRecord up;    // averaged over repeats
    stats::SweepRecord down;
    stats::DeadbandResult deadband;
};

struct Exp2Result {
    std::vector<AxisSweep> axes;
    std::int64_t virtual_ms = 0;
};

/// Steps the plant directly in fixed ticks (the network adds nothing to a
/// quasi-static sweep) and reads the IMU after each dwell.
class SweepDriver {
public:
    SweepDriver(const probe::Calibration& cal, const Exp2Options& o)
        : cal_(cal), opts_(o), st_(probe::initial_state(cal)), imu_(o.imu_seed, o.imu_sigma_deg) {}

    /// Runs the motor until `axis` sits at `target` steps.
    void drive_to(probe::AxisId axis, std::int64_t target) {
        const auto pos = st_.axis(axis).position_steps;
        if (pos == target) return;
        const int dir = target > pos ? 1 : -1;
        st_ = probe::apply_axis_command(st_, axis, dir, true);
        // Generous bound: twice the nominal travel time plus a tick.
        const auto limit = 2 * std::abs(target - pos) * 1000 / std::max<std::int64_t>(1, st_.axis(axis).rate_steps_per_s) + 2 * opts_.tick_ms;
        std::int64_t spent = 0;
        while ((dir > 0 ? st_.axis(axis).position_steps < target : st_.axis(axis).position_steps > target)) {
            if (spent > limit) throw range_error("sweep target out of the axis range");
            step(opts_.tick_ms);
            spent += opts_.tick_ms;
        }
        st_ = probe::apply_axis_command(st_, axis, dir, false);
    }

    void dwell(std::int64_t ms) {
        for (std::int64_t t = 0; t < ms; t += opts_.tick_ms) step(opts_.tick_ms);
    }

    double read(probe::AxisId axis) {
        const auto r = imu_.sample(probe::tip_pose(cal_, st_), st_.clock_ms);
        return axis == probe::AxisId::SteerLR ? r.yaw_deg : r.pitch_deg;
    }

    const probe::ProbeState& state() const noexcept { return st_; }

private:
    void step(std::int64_t dt) {
        if (opts_.wall_clock) std::this_thread::sleep_for(std::chrono::milliseconds(dt));
        st_ = probe::advance(cal_, st_, dt);
    }

    const probe::Calibration& cal_;
    Exp2Options opts_;
    probe::ProbeState st_;
    probe::ImuEmulator imu_;
};

/// Full up/down sweeps of one steering axis at a fixed step interval,
/// averaged over repeats, followed by deadband extraction.
inline AxisSweep sweep_axis(SweepDriver& drv, const probe::Calibration& cal, probe::AxisId axis,
                            const Exp2Options& o) {
    if (o.interval_steps <= 0 || o.repeats <= 0) throw config_error("sweep interval and repeats must be positive");
    const auto& env = cal.envelope(axis == probe::AxisId::SteerLR);
    const auto lo = env.grid().front();
    const auto hi = env.grid().back();
    std::vector<std::int64_t> points;
    for (auto s = lo; s <= hi; s += o.interval_steps) points.push_back(s);

    std::map<std::int64_t, double> up_sum, down_sum;
    drv.drive_to(axis, lo);
    drv.dwell(o.dwell_ms);
    for (int r = 0; r < o.repeats; ++r) {
        for (auto s : points) {
            drv.drive_to(axis, s);
            drv.dwell(o.dwell_ms);
            up_sum[s] += drv.read(axis);
        }
        for (auto it = points.rbegin(); it != points.rend(); ++it) {
            drv.drive_to(axis, *it);
            drv.dwell(o.dwell_ms);
            down_sum[*it] += drv.read(axis);
        }
    }
    AxisSweep out;
    out.axis = axis;
    out.up.direction = 1;
    out.down.direction = -1;
    out.up.repeats = out.down.repeats = o.repeats;
    for (auto s : points) {
        out.up.samples.emplace_back(s, up_sum[s] / o.repeats);
        out.down.samples.emplace_back(s, down_sum[s] / o.repeats);
    }
    out.deadband = stats::extract_deadband(out.up, out.down, cal.steering_neutral_steps);
    return out;
}

inline Exp2Result run_exp2(const probe::Calibration& cal, const Exp2Options& o) {
    SweepDriver drv(cal, o);
    Exp2Result r;
    for (auto axis : {probe::AxisId::SteerLR, probe::AxisId::SteerUD}) r.axes.push_back(sweep_axis(drv, cal, axis, o));
    r.virtual_ms = drv.state().clock_ms;
    return r;
}

} // namespace teleprobe::harness
