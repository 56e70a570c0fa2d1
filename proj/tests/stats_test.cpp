#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "teleprobe/stats/csv.hpp"
#include "teleprobe/stats/deadband.hpp"
#include "teleprobe/stats/descriptive.hpp"
#include "teleprobe/stats/segment.hpp"
#include "teleprobe/stats/welch.hpp"
#include "stats_oracle.hpp"
#include "welch_fixtures.hpp"

using namespace teleprobe;
using namespace teleprobe::stats;


TEST(Descriptive, OneToFour) {
    const auto s = descriptive(std::vector<double>{1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(s.mean(), 2.5);
    EXPECT_NEAR(s.std(), 1.2909944487358056, 1e-12);
    EXPECT_DOUBLE_EQ(s.median(), 2.5);
    // Hinges: median(1,2) = 1.5, median(3,4) = 3.5.
    EXPECT_DOUBLE_EQ(s.iqr(), 2.0);
}

TEST(Descriptive, OddCountSharesMedianInHinges) {
    const auto s = descriptive(std::vector<double>{7, 1, 3, 5, 9});
    // lower {1,3,5} -> 3, upper {5,7,9} -> 7
    EXPECT_DOUBLE_EQ(s.iqr(), 4.0);
    EXPECT_DOUBLE_EQ(s.median(), 5.0);
}

TEST(Descriptive, ConstantList) {
    const auto s = descriptive(std::vector<double>(17, 0.1));
    EXPECT_EQ(s.std(), 0.0);
    EXPECT_EQ(s.iqr(), 0.0);
    EXPECT_EQ(s.cov(), 0.0);
    EXPECT_EQ(s.mean(), 0.1);
}

TEST(Descriptive, SingleElement) {
    const auto s = descriptive(std::vector<double>{4.2});
    EXPECT_EQ(s.mean(), 4.2);
    EXPECT_EQ(s.median(), 4.2);
    EXPECT_THROW((void)s.std(), stats_error);
    EXPECT_THROW((void)s.iqr(), stats_error);
}

TEST(Descriptive, EmptyThrowsAndZeroMeanHasNoCov) {
    EXPECT_THROW(descriptive(std::vector<double>{}), stats_error);
    const auto s = descriptive(std::vector<double>{-1, 1});
    EXPECT_THROW((void)s.cov(), stats_error);
}

TEST(Descriptive, MatchesBruteForceOnRandomLists) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = std::uniform_int_distribution<int>(2, 1000)(rng);
        std::vector<double> xs(n);
        std::lognormal_distribution<double> d(1.0, 0.8);
        for (auto& x : xs) x = d(rng);
        const auto s = descriptive(xs);
        auto rel = [](long double want, double got) {
            return static_cast<double>(std::fabs((got - want) / (want == 0 ? 1 : want)));
        };
        ASSERT_LE(rel(oracle::mean(xs), s.mean()), 1e-12);
        ASSERT_LE(rel(oracle::stddev(xs), s.std()), 1e-12);
        ASSERT_LE(rel(oracle::median_of(xs), s.median()), 1e-12);
        ASSERT_LE(rel(oracle::iqr(xs), s.iqr()), 1e-12);
        ASSERT_LE(rel(oracle::stddev(xs) / oracle::mean(xs), s.cov()), 1e-12);
    }
}

TEST(Welch, FixtureBattery) {
    const auto& cases = welch_fixtures::cases();
    ASSERT_GE(cases.size(), 20u);
    for (const auto& c : cases) {
        const auto r = welch_t_test(c.a, c.b);
        EXPECT_NEAR(r.t, c.t, 1e-6 * std::max(1.0, std::fabs(c.t)));
        EXPECT_NEAR(r.dof, c.dof, 1e-6 * std::max(1.0, c.dof));
        EXPECT_NEAR(r.p, c.p, 1e-6);
    }
}

TEST(Welch, ShiftedLists) {
    const auto r = welch_t_test(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 3, 4, 5, 6});
    EXPECT_NEAR(r.t, -1.0, 1e-12);
    EXPECT_NEAR(r.dof, 8.0, 1e-12);
    EXPECT_NEAR(r.p, 0.34659350708733416, 1e-9);
}

TEST(Welch, IdenticalSamplesGivePOne) {
    const std::vector<double> a{3.1, 4.7, 2.2, 9.0};
    const auto r = welch_t_test(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
}

TEST(Welch, SwapNegatesT) {
    const std::vector<double> a{1.0, 4.0, 2.5, 3.3}, b{7.0, 5.5, 9.1, 6.0, 8.8};
    const auto ab = welch_t_test(a, b);
    const auto ba = welch_t_test(b, a);
    EXPECT_DOUBLE_EQ(ab.t, -ba.t);
    EXPECT_DOUBLE_EQ(ab.p, ba.p);
    EXPECT_DOUBLE_EQ(ab.dof, ba.dof);
}

TEST(Welch, DegenerateInputs) {
    EXPECT_THROW(welch_t_test(std::vector<double>{1, 1, 1}, std::vector<double>{2, 3}), stats_error);
    EXPECT_THROW(welch_t_test(std::vector<double>{1}, std::vector<double>{2, 3}), stats_error);
}

TEST(IncompleteBeta, KnownValues) {
    EXPECT_NEAR(regularized_incomplete_beta(1.0, 1.0, 0.3), 0.3, 1e-14);
    EXPECT_NEAR(regularized_incomplete_beta(2.0, 3.0, 0.4), 0.5248, 1e-12);
    EXPECT_NEAR(student_t_cdf(0.0, 5.0), 0.5, 1e-15);
    EXPECT_NEAR(student_t_cdf(2.015048372669157, 5.0), 0.95, 1e-9);
}

TEST(SegmentMetrics, StopsShortOfTarget) {
    std::vector<TracePoint> tr{{0, 0.0, 1, true}, {100, 5.0, 1, true}, {200, 9.6, 0, false}, {300, 9.6, 0, false}};
    const auto r = segment_metrics(tr, 10.0, {0, 1300, 0.3});
    EXPECT_NEAR(r.error_deg, 0.4, 1e-12);
    EXPECT_EQ(r.max_overshoot_deg, 0.0);
    EXPECT_DOUBLE_EQ(r.duration_s, 1.3);
}

TEST(SegmentMetrics, OvershootThenReturn) {
    std::vector<TracePoint> tr{{0, 0.0, 1, true}, {100, 8.0, 1, true}, {200, 12.6, 0, false},
                               {300, 11.0, -1, true}, {400, 10.1, 0, false}};
    const auto r = segment_metrics(tr, 10.0, {0, {}, 0.3});
    EXPECT_NEAR(r.max_overshoot_deg, 2.6, 1e-12);
    EXPECT_NEAR(r.error_deg, 0.1, 1e-12);
}

TEST(SegmentMetrics, DescendingApproachOvershoot) {
    std::vector<TracePoint> tr{{0, 5.0, -1, true}, {100, -1.5, 0, false}, {200, -0.2, 0, false}};
    EXPECT_NEAR(segment_metrics(tr, 0.0, {0, {}, 0.3}).max_overshoot_deg, 1.5, 1e-12);
}

TEST(SegmentMetrics, NeverMoves) {
    std::vector<TracePoint> tr{{0, 3.0, 0, false}, {1000, 3.0, 0, false}};
    const auto r = segment_metrics(tr, -2.0, {0, {}, 0.3});
    EXPECT_DOUBLE_EQ(r.error_deg, 5.0);
    EXPECT_EQ(r.max_overshoot_deg, 0.0);
}

TEST(SegmentMetrics, EmptyTraceThrows) {
    EXPECT_THROW(segment_metrics(std::vector<TracePoint>{}, 0.0, {}), stats_error);
}

TEST(SegmentMetrics, OvershootInvariantUnderExtremaPreservingResampling) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TracePoint> tr;
        double a = 0.0;
        for (int i = 0; i < 200; ++i) {
            a += std::normal_distribution<double>(0.08, 0.5)(rng);
            tr.push_back({i * 40, a, 1, true});
        }
        const double target = 6.0;
        const double full = max_overshoot(tr, target, 0.3);
        // Keep the endpoints, the extrema and a random subset of the rest.
        const auto [mn, mx] = std::minmax_element(tr.begin() + 1, tr.end(),
                                                  [](auto& l, auto& r) { return l.angle_deg < r.angle_deg; });
        std::vector<TracePoint> sub;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const bool keep = i == 0 || &tr[i] == &*mn || &tr[i] == &*mx || rng() % 3 == 0;
            if (keep) sub.push_back(tr[i]);
        }
        ASSERT_DOUBLE_EQ(max_overshoot(sub, target, 0.3), full);
    }
}

TEST(Deadband, IdenticalBranchesGiveZeroGap) {
    SweepRecord up{+1, {}, 1}, down{-1, {}, 1};
    for (std::int64_t s = 0; s <= 6000; s += 400) {
        const double y = 0.01 * static_cast<double>(s) - 30.0;
        up.samples.emplace_back(s, y);
        down.samples.emplace_back(6000 - s, 0.01 * static_cast<double>(6000 - s) - 30.0);
    }
    const auto r = extract_deadband(up, down, 3000);
    for (const auto& [s, g] : r.gaps) EXPECT_NEAR(g, 0.0, 1e-9) << s;
    EXPECT_NEAR(r.neutral_gap, 0.0, 1e-9);
    EXPECT_GT(r.zone_lo, r.zone_hi);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Deadband, ConstantGapRecovered) {
    SweepRecord up{+1, {}, 1}, down{-1, {}, 1};
    for (std::int64_t s = 0; s <= 6000; s += 400) {
        const auto sd = static_cast<double>(s);
        up.samples.emplace_back(s, std::max(-60.0, 0.025 * (sd - 3600)));
        down.samples.emplace_back(s, std::min(60.0, 0.025 * (sd - 2400)));
    }
    const auto r = extract_deadband(up, down, 3000);
    EXPECT_NEAR(r.max_gap, 1200.0, 1e-9);
    EXPECT_NEAR(r.neutral_gap, 1200.0, 1e-9);
}

TEST(Deadband, NonMonotoneSweepWarnsAndIsRegularised) {
    SweepRecord up{+1, {{0, 0.0}, {400, 1.0}, {800, 0.5}, {1200, 2.0}}, 1};
    SweepRecord down{-1, {{0, 0.0}, {400, 1.0}, {800, 1.5}, {1200, 2.0}}, 1};
    const auto r = extract_deadband(up, down, 600);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(isotonic_increasing({0.0, 1.0, 0.5, 2.0}), (std::vector<double>{0.0, 0.75, 0.75, 2.0}));
}

TEST(Csv, TraceRoundTrip) {
    std::vector<TracePoint> tr{{0, 1.25, 1, true}, {40, -3.5, -1, false}};
    std::stringstream ss;
    write_trace_csv(ss, tr);
    EXPECT_EQ(ss.str(), "ts_ms,angle_deg,cmd_dir,cmd_on\n0,1.25,1,1\n40,-3.5,-1,0\n");
    EXPECT_EQ(read_trace_csv(ss), tr);
}

TEST(Csv, SummaryRow) {
    std::stringstream ss;
    write_summary_row(ss, "manual", "UD", "time_s", descriptive(std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(ss.str(), "manual,UD,time_s,4,2.5,1.290994449,2.5,2,0.5163977795\n");
}
