#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "teleprobe/probe/imu.hpp"
#include "teleprobe/probe/probe.hpp"
#include "properties.hpp"
#include "test_support.hpp"

using namespace teleprobe;
using namespace teleprobe::probe;
using test_support::default_calibration;

namespace {

BacklashEnvelope linear_lr_envelope() {
    std::vector<std::int64_t> grid;
    std::vector<double> asc, desc;
    for (std::int64_t s = 0; s <= 6000; s += 400) {
        grid.push_back(s);
        asc.push_back(0.025 * static_cast<double>(s - 3600));
        desc.push_back(0.025 * static_cast<double>(s - 2400));
    }
    return BacklashEnvelope(grid, asc, desc, 0, 6000);
}

} // namespace

TEST(MotorAxis, EngagedAxisMovesAtConstantRate) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    const auto start = st.axis(AxisId::SteerLR).position_steps;
    st = apply_axis_command(st, AxisId::SteerLR, +1, true);
    st = advance(cal, st, 1000);
    EXPECT_EQ(st.axis(AxisId::SteerLR).position_steps, start + 400);
}

TEST(MotorAxis, ReleasedAxisHolds) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    st = apply_axis_command(st, AxisId::SteerLR, +1, true);
    st = advance(cal, st, 250);
    st = apply_axis_command(st, AxisId::SteerLR, +1, false);
    const auto held = st.axis(AxisId::SteerLR).position_steps;
    st = advance(cal, st, 3000);
    EXPECT_EQ(st.axis(AxisId::SteerLR).position_steps, held);
    EXPECT_EQ(st.axis(AxisId::SteerLR).engaged_dir, 0);
}

TEST(MotorAxis, ClampsAtLimit) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    st.axis(AxisId::SteerLR).position_steps = 6000;
    st = apply_axis_command(st, AxisId::SteerLR, +1, true);
    st = advance(cal, st, 2000);
    EXPECT_EQ(st.axis(AxisId::SteerLR).position_steps, 6000);
}

TEST(MotorAxis, OtherAxesUntouchedByCommand) {
    const auto& cal = default_calibration();
    const auto st0 = initial_state(cal);
    const auto st1 = apply_axis_command(st0, AxisId::Rotation, -1, true);
    for (AxisId a : all_axes) {
        if (a != AxisId::Rotation) {
            EXPECT_EQ(st0.axis(a), st1.axis(a));
        }
    }
    EXPECT_EQ(st1.axis(AxisId::Rotation).engaged_dir, -1);
}

TEST(Advance, ZeroDtIsIdentity) {
    const auto& cal = default_calibration();
    auto st = apply_axis_command(initial_state(cal), AxisId::SteerUD, +1, true);
    EXPECT_EQ(advance(cal, st, 0), st);
}

TEST(Advance, SplitAdvanceMatchesSingleAdvance) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    for (AxisId a : all_axes) st = apply_axis_command(st, a, a == AxisId::Rotation ? -1 : +1, true);
    const auto once = advance(cal, st, 1000);
    const auto twice = advance(cal, advance(cal, st, 500), 500);
    EXPECT_EQ(once, twice);
    // Fractional-step increments too.
    auto many = st;
    for (int i = 0; i < 1000; ++i) many = advance(cal, many, 1);
    EXPECT_EQ(once, many);
}

TEST(Advance, SteerUdFromThreeThousand) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    ASSERT_EQ(st.axis(AxisId::SteerUD).position_steps, 3000);
    st = apply_axis_command(st, AxisId::SteerUD, +1, true);
    st = advance(cal, st, 1000);
    EXPECT_EQ(st.axis(AxisId::SteerUD).position_steps, 3400);
    EXPECT_EQ(st.clock_ms, 1000);
}

TEST(PlayUpdate, ReversalInsideDeadbandHoldsOutput) {
    const auto env = linear_lr_envelope();
    ASSERT_DOUBLE_EQ(env.ascending(4000), 10.0);
    const HysteresisState mem{10.0};
    EXPECT_DOUBLE_EQ(play_update(env, mem, 3800).tip_deg, 10.0);
    // Oracle: stepping down one step at a time never changes the output before 2800.
    EXPECT_NEAR(test_support::replay_single_steps(env, 10.0, 4000, 3800), 10.0, 1e-12);
}

TEST(PlayUpdate, ReengagesAfterFullDeadband) {
    const auto env = linear_lr_envelope();
    const HysteresisState mem{10.0};
    const auto out = play_update(env, mem, 2800);
    EXPECT_DOUBLE_EQ(out.tip_deg, env.descending(2800));
    EXPECT_DOUBLE_EQ(out.tip_deg, 10.0);
    // One more step down and the output follows the descending branch.
    EXPECT_LT(play_update(env, out, 2799).tip_deg, 10.0);
}

TEST(PlayUpdate, MonotoneUpSweepTracesAscendingBranch) {
    const auto& env = default_calibration().steer_ud;
    HysteresisState mem{env.ascending(0)};
    for (std::int64_t s = 0; s <= 6000; s += 7) {
        mem = play_update(env, mem, s);
        ASSERT_DOUBLE_EQ(mem.tip_deg, env.ascending(static_cast<double>(s))) << "s=" << s;
    }
}

TEST(PlayUpdate, OutOfRangeThrows) {
    const auto& env = default_calibration().steer_lr;
    EXPECT_THROW(play_update(env, HysteresisState{}, 6001), range_error);
    EXPECT_THROW(play_update(env, HysteresisState{}, -1), range_error);
}

TEST(PlayUpdate, RandomWalkMatchesSingleStepReplay) {
    const auto& cal = default_calibration();
    std::mt19937_64 rng(11);
    for (bool lr : {true, false}) {
        const auto& env = cal.envelope(lr);
        std::int64_t s = 3000;
        HysteresisState mem = initial_hysteresis(env, s);
        double oracle = mem.tip_deg;
        for (int i = 0; i < 400; ++i) {
            const std::int64_t next = std::uniform_int_distribution<std::int64_t>(0, 6000)(rng);
            mem = play_update(env, mem, next);
            oracle = test_support::replay_single_steps(env, oracle, s, next);
            s = next;
            ASSERT_NEAR(mem.tip_deg, oracle, 1e-9);
        }
    }
}

TEST(TipPose, NeutralIsZero) {
    const auto& cal = default_calibration();
    EXPECT_EQ(tip_pose(cal, initial_state(cal)), (TipPose{0.0, 0.0, 0.0, 0.0}));
}

TEST(TipPose, RotationMap) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    st.axis(AxisId::Rotation).position_steps += 800;
    EXPECT_DOUBLE_EQ(tip_pose(cal, st).roll_deg, 80.0);
}

TEST(TipPose, PitchIsUdMemory) {
    const auto& cal = default_calibration();
    auto st = initial_state(cal);
    st.ud.tip_deg = 12.3;
    st.lr.tip_deg = -4.5;
    EXPECT_DOUBLE_EQ(tip_pose(cal, st).pitch_deg, 12.3);
    EXPECT_DOUBLE_EQ(tip_pose(cal, st).yaw_deg, -4.5);
}

TEST(Imu, NoiselessReadingIsQuantizedPose) {
    ImuEmulator imu(3, 0.0);
    const auto r = imu.sample(TipPose{12.344, -3.0, 7.126, 5.0}, 40);
    EXPECT_DOUBLE_EQ(r.roll_deg, 12.34);
    EXPECT_DOUBLE_EQ(r.pitch_deg, -3.0);
    EXPECT_DOUBLE_EQ(r.yaw_deg, 7.13);
    EXPECT_EQ(r.ts_ms, 40);
}

TEST(Imu, NoiseSigmaMatchesConfiguration) {
    ImuEmulator imu(2024);
    const int n = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = imu.sample(TipPose{}, i).pitch_deg;
        sum += v;
        sum2 += v * v;
    }
    const double m = sum / n;
    const double sd = std::sqrt((sum2 - n * m * m) / (n - 1));
    EXPECT_GE(sd, 0.025);
    EXPECT_LE(sd, 0.035);
}

TEST(Imu, ErrorBoundedBySixSigma) {
    ImuEmulator imu(99);
    const TipPose pose{10.0, -20.0, 30.0, 0.0};
    for (int i = 0; i < 20000; ++i) {
        const auto r = imu.sample(pose, i);
        ASSERT_LE(std::fabs(r.pitch_deg - pose.pitch_deg), 6 * 0.03 + 0.005);
    }
}

TEST(Imu, SequenceIncrementsByOne) {
    ImuEmulator imu(1);
    auto prev = imu.sample(TipPose{}, 0).seq;
    for (int i = 1; i < 100; ++i) {
        const auto s = imu.sample(TipPose{}, i).seq;
        EXPECT_EQ(s, prev + 1);
        prev = s;
    }
}

TEST(Determinism, IdenticalInputsGiveIdenticalTrajectories) {
    const auto& cal = default_calibration();
    auto run = [&] {
        std::mt19937_64 rng(5);
        auto st = initial_state(cal);
        std::vector<ProbeState> traj;
        for (int i = 0; i < 2000; ++i) {
            const auto a = all_axes[rng() % 4];
            st = apply_axis_command(st, a, rng() % 2 ? 1 : -1, rng() % 3 != 0);
            st = advance(cal, st, static_cast<std::int64_t>(rng() % 50));
            traj.push_back(st);
        }
        return traj;
    };
    EXPECT_EQ(run(), run());
}

TEST(PlayProperties, RandomSequencesBothAxes) {
    const auto& cal = default_calibration();
    for (bool lr : {true, false}) {
        properties::PlayStats st;
        const auto v = properties::play_operator_suite(cal.envelope(lr), 300, lr ? 1 : 2, st);
        EXPECT_FALSE(v.has_value()) << *v;
        EXPECT_EQ(st.sequences, 300u);
        EXPECT_GT(st.reversals_checked, 50u);
    }
}
