#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "teleprobe/probe/hysteresis.hpp"
#include "test_support.hpp"

using namespace teleprobe;
using namespace teleprobe::probe;
using test_support::default_calibration;

TEST(Calibration, DefaultLrGapIsConstant1200) {
    const auto& env = default_calibration().steer_lr;
    // Over the part of the ascending branch that lies within the descending branch's range.
    for (std::int64_t s = 1200; s <= 6000; s += 40) {
        ASSERT_NEAR(env.gap_from_ascending(static_cast<double>(s)), 1200.0, 1e-6) << "s=" << s;
    }
    for (double level = -59.0; level <= 59.0; level += 0.5) {
        ASSERT_NEAR(env.gap_at_level(level), 1200.0, 1e-6);
    }
}

TEST(Calibration, DefaultUdGapTapersFromNeutral) {
    const auto& cal = default_calibration();
    const auto& env = cal.steer_ud;
    const double neutral_level = initial_hysteresis(env, 3000).tip_deg;
    EXPECT_NEAR(neutral_level, 0.0, 1e-9);
    EXPECT_NEAR(env.gap_at_level(neutral_level), 640.0, 1e-6);
    // The 640-step chord is centred on the neutral position.
    EXPECT_NEAR(0.5 * (env.ascending_inverse(0.0) + env.descending_inverse(0.0)), 3000.0, 1e-6);
    for (std::int64_t s = 0; s <= 6000; s += 40) {
        const auto sd = static_cast<double>(s);
        if (s <= 1800 || s >= 4200) {
            ASSERT_NEAR(env.descending(sd) - env.ascending(sd), 0.0, 1e-9) << "s=" << s;
        }
    }
    EXPECT_EQ(env.zone_lo(), 1800);
    EXPECT_EQ(env.zone_hi(), 4200);
}

TEST(Calibration, UdBranchesHaveTwoSlopesInsideZone) {
    const auto& env = default_calibration().steer_ud;
    const double low = (env.ascending(3000) - env.ascending(2000)) / 1000.0;
    const double high = (env.ascending(4100) - env.ascending(3500)) / 600.0;
    EXPECT_GT(std::fabs(high - low), 0.005);
}

TEST(Calibration, StepsPerWheelDegreeConsistency) {
    const double k = default_calibration().steps_per_wheel_degree;
    EXPECT_DOUBLE_EQ(1200.0 / k, 15.0);
    EXPECT_DOUBLE_EQ(640.0 / k, 8.0);
    EXPECT_DOUBLE_EQ(2400.0 / k, 30.0);
}

TEST(Calibration, BranchOrderViolationNamesGridIndex) {
    std::ifstream in(test_support::source_path("calib/default.json"));
    auto doc = nlohmann::json::parse(in);
    auto& ud = doc["axes"]["steer_ud"];
    const double a = ud["ascending_deg"][80].get<double>();
    ud["descending_deg"][80] = a - 1.0;
    try {
        (void)parse_calibration(doc);
        FAIL() << "expected calibration_error";
    } catch (const calibration_error& e) {
        EXPECT_EQ(e.grid_index(), 80u);
        EXPECT_NE(std::string(e.what()).find("steer_ud"), std::string::npos);
    }
}

TEST(Calibration, NonMonotoneBranchRejected) {
    std::ifstream in(test_support::source_path("calib/default.json"));
    auto doc = nlohmann::json::parse(in);
    doc["axes"]["steer_lr"]["ascending_deg"][10] = 500.0;
    try {
        (void)parse_calibration(doc);
        FAIL() << "expected calibration_error";
    } catch (const calibration_error& e) {
        EXPECT_EQ(e.grid_index(), 11u);
    }
}

TEST(Calibration, ParseErrors) {
    EXPECT_THROW(parse_calibration(std::string("{not json")), calibration_error);
    EXPECT_THROW(parse_calibration(std::string("{\"axes\":{}}")), calibration_error);
    EXPECT_THROW(load_calibration("/nonexistent/calib.json"), calibration_error);
}

TEST(Calibration, BranchesMustCoincideOutsideZone) {
    std::vector<std::int64_t> grid{0, 100, 200};
    EXPECT_THROW(BacklashEnvelope(grid, {0, 1, 2}, {0, 1.5, 2}, 0, 50), calibration_error);
    EXPECT_NO_THROW(BacklashEnvelope(grid, {0, 1, 2}, {0, 1.5, 2}, 50, 150));
}
