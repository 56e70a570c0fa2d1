#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "teleprobe/harness/rig.hpp"
#include "teleprobe/harness/seed.hpp"
#include "teleprobe/op/client.hpp"

namespace teleprobe::harness {

struct Move {
    probe::AxisId axis = probe::AxisId::SteerLR;
    int dir = 1;
    std::int64_t duration_ms = 0;
};

struct MoveSequence {
    std::string name;
    std::vector<Move> moves;
};

/// Five fixed sequences touching all four axes in different orders and extents.
inline std::vector<MoveSequence> builtin_sequences() {
    using A = probe::AxisId;
    return {
        {"seq1", {{A::Translation, 1, 2000}, {A::Rotation, 1, 1500}, {A::SteerLR, 1, 1000}, {A::SteerUD, 1, 1000}}},
        {"seq2", {{A::SteerUD, -1, 1500}, {A::SteerLR, -1, 2000}, {A::Rotation, -1, 1000}, {A::Translation, 1, 500}}},
        {"seq3",
         {{A::Rotation, 1, 3000}, {A::Translation, 1, 1000}, {A::SteerLR, 1, 500}, {A::SteerLR, -1, 500},
          {A::SteerUD, 1, 2500}}},
        {"seq4",
         {{A::SteerLR, 1, 2500}, {A::SteerUD, -1, 2500}, {A::Translation, 1, 2500}, {A::Rotation, -1, 2500}}},
        {"seq5",
         {{A::Translation, 1, 800}, {A::SteerUD, 1, 600}, {A::Rotation, 1, 700}, {A::SteerLR, -1, 900},
          {A::Translation, -1, 400}, {A::SteerUD, -1, 600}}},
    };
}

/// Probe positions after each robot tick: the trajectory AP/STA runs are compared on.
struct TrajectoryPoint {
    std::int64_t ts_ms = 0;
    std::array<std::int64_t, 4> positions{};
    double lr_tip_deg = 0.0;
    double ud_tip_deg = 0.0;

    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct SequenceRun {
    std::string name;
    double completion_ms = 0.0;
    bool completed = false;
    std::vector<TrajectoryPoint> trajectory;
};

/// Runs `seq` on a fresh rig: for each move, on / wait / off, then a heartbeat
/// whose Ack must arrive before the next move. Completion time spans the first
/// command to the last Ack.
inline SequenceRun run_sequence(const probe::Calibration& cal, const RigOptions& opts, const MoveSequence& seq,
                                std::int64_t timeout_ms = 120000) {
    SimRig rig(cal, opts);
    SequenceRun run;
    run.name = seq.name;
    auto& robot = rig.robot();
    robot.on_tick([&run, &rig](const probe::ProbeState& st) {
        TrajectoryPoint p;
        p.ts_ms = rig.clock().now_ms();
        for (auto a : probe::all_axes) p.positions[probe::index(a)] = st.axis(a).position_steps;
        p.lr_tip_deg = st.lr.tip_deg;
        p.ud_tip_deg = st.ud.tip_deg;
        run.trajectory.push_back(p);
    });

    auto conn = rig.connect();
    op::OperatorClient client(rig.clock(), conn, {opts.session, protocol::Role::Operator, 0, 3000});
    auto& clock = rig.clock();
    std::size_t next = 0;
    net::Micros t0 = -1;
    std::int64_t waiting_ack = -1;
    bool done = false;

    std::function<void()> start_move = [&] {
        if (next >= seq.moves.size()) return;
        const Move m = seq.moves[next];
        if (t0 < 0) t0 = clock.now_us();
        client.send_cmd(m.axis, m.dir, true);
        clock.call_after(net::ms_to_us(static_cast<double>(m.duration_ms)), [&, m] {
            client.send_cmd(m.axis, m.dir, false);
            waiting_ack = client.send_heartbeat();
        });
    };
    client.on_ack([&](const protocol::Ack& a) {
        if (a.ack_seq != waiting_ack) return;
        waiting_ack = -1;
        if (++next >= seq.moves.size()) {
            run.completion_ms = static_cast<double>(clock.now_us() - t0) / 1000.0;
            done = true;
            return;
        }
        start_move();
    });
    client.start();
    // Begin once the robot has answered the hello.
    clock.run_while_not([&] { return client.acknowledged(); }, net::ms_to_us(5000.0));
    if (!client.acknowledged()) return run;
    start_move();
    clock.run_while_not([&] { return done; }, clock.now_us() + net::ms_to_us(static_cast<double>(timeout_ms)));
    run.completed = done;
    client.stop();
    robot.on_tick(nullptr);
    return run;
}

struct Exp1Result {
    std::string preset;
    std::vector<SequenceRun> ap;
    std::vector<SequenceRun> sta;
};

inline Exp1Result run_exp1(const probe::Calibration& cal, const std::string& preset, std::uint64_t seed,
                            bool wall_clock = false) {
    Exp1Result r;
    r.preset = preset;
    const auto seqs = builtin_sequences();
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        RigOptions o;
        o.impairment = net::impairment_preset(preset, derive_seed(seed, {0xE1, i}));
        o.imu_seed = derive_seed(seed, {0xE2, i});
        o.wall_clock = wall_clock;
        o.mode = net::Mode::AP;
        r.ap.push_back(run_sequence(cal, o, seqs[i]));
        o.mode = net::Mode::STA;
        r.sta.push_back(run_sequence(cal, o, seqs[i]));
    }
    return r;
}

} // namespace teleprobe::harness
