// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance [--cli PATH]
//
// The CLI path is needed for the rerun-determinism criterion, which drives the
// real binary twice and compares every CSV it wrote.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "failsafe_scenario.hpp"
#include "properties.hpp"
#include "stats_oracle.hpp"
#include "teleprobe/harness/exp1.hpp"
#include "teleprobe/harness/exp2.hpp"
#include "teleprobe/harness/exp3.hpp"
#include "teleprobe/harness/report.hpp"
#include "teleprobe/stats/descriptive.hpp"
#include "teleprobe/stats/welch.hpp"
#include "test_support.hpp"
#include "welch_fixtures.hpp"

using namespace teleprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) { return stats::fmt_num(v); }

std::string summarize(const std::vector<harness::Check>& cs) {
    std::string out;
    for (const auto& c : cs) {
        out += (out.empty() ? "" : "; ") + c.name + (c.pass ? "" : " FAILED");
        if (!c.detail.empty()) out += " (" + c.detail + ")";
    }
    return out;
}

Outcome exp2_deadbands() {
    const auto r = harness::run_exp2(test_support::default_calibration(), {});
    const auto cs = harness::exp2_checks(r);
    return {harness::all_pass(cs), summarize(cs)};
}

Outcome play_operator() {
    const auto& cal = test_support::default_calibration();
    std::string detail;
    for (bool lr : {true, false}) {
        properties::PlayStats st;
        const auto v = properties::play_operator_suite(cal.envelope(lr), 10000, lr ? 101 : 202, st);
        if (v) return {false, std::string(lr ? "LR: " : "UD: ") + *v};
        detail += std::string(detail.empty() ? "" : "; ") + (lr ? "LR " : "UD ") + std::to_string(st.sequences) +
                  " sequences, " + std::to_string(st.updates) + " moves, " + std::to_string(st.reversals_checked) +
                  " reversal widths, worst oracle diff " + num(st.worst_oracle_diff);
    }
    return {true, detail};
}

Outcome ap_sta() {
    std::vector<harness::Exp1Result> rs;
    for (const auto& p : {"none", "lan", "5g"}) rs.push_back(harness::run_exp1(test_support::default_calibration(), p, 1));
    const auto cs = harness::exp1_checks(rs);
    return {harness::all_pass(cs), summarize(cs)};
}

Outcome exp3_orderings() {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
    const auto r = harness::run_exp3(test_support::default_calibration(), harness::default_conditions(),
                                     {op::default_target_script(probe::AxisId::SteerLR),
                                      op::default_target_script(probe::AxisId::SteerUD)},
                                     seeds);
    const auto cs = harness::exp3_checks(r);
    return {harness::all_pass(cs), summarize(cs)};
}

Outcome statistics() {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = std::uniform_int_distribution<int>(2, 2000)(rng);
        std::vector<double> xs(static_cast<std::size_t>(n));
        std::lognormal_distribution<double> d(1.0, 0.8);
        for (auto& x : xs) x = d(rng);
        const auto s = stats::descriptive(xs);
        auto rel = [](long double want, double got) {
            return static_cast<double>(std::fabs((got - want) / (want == 0 ? 1 : want)));
        };
        for (double e : {rel(oracle::mean(xs), s.mean()), rel(oracle::stddev(xs), s.std()),
                         rel(oracle::median_of(xs), s.median()), rel(oracle::iqr(xs), s.iqr()),
                         rel(oracle::stddev(xs) / oracle::mean(xs), s.cov())}) {
            worst = std::max(worst, e);
        }
    }
    if (worst > 1e-12) return {false, "descriptive relative error " + num(worst)};

    double worst_t = 0.0, worst_p = 0.0;
    const auto& cases = welch_fixtures::cases();
    for (const auto& c : cases) {
        const auto r = stats::welch_t_test(c.a, c.b);
        worst_t = std::max({worst_t, std::fabs(r.t - c.t) / std::max(1.0, std::fabs(c.t)),
                            std::fabs(r.dof - c.dof) / std::max(1.0, c.dof)});
        worst_p = std::max(worst_p, std::fabs(r.p - c.p));
    }
    if (worst_t > 1e-6 || worst_p > 1e-6) return {false, "welch error t/dof " + num(worst_t) + ", p " + num(worst_p)};

    const std::vector<double> a{3.1, 4.7, 2.2, 9.0, 5.5};
    const auto same = stats::welch_t_test(a, a);
    if (same.p != 1.0 || same.t != 0.0) return {false, "a == b gave p " + num(same.p)};
    return {true, "descriptive worst rel err " + num(worst) + " over 500 lists; " + std::to_string(cases.size()) +
                      " welch fixtures, worst t/dof " + num(worst_t) + ", p " + num(worst_p) + "; a == b -> p = 1"};
}

Outcome failsafe() {
    const auto& cal = test_support::default_calibration();
    const int seeds = 150;
    double worst = 0.0;
    for (std::uint64_t s = 1; s <= static_cast<std::uint64_t>(seeds); ++s) {
        const auto o = failsafe_scenario::run(cal, s);
        worst = std::max(worst, o.worst_silence_ms);
        if (!o.acknowledged || !o.all_off_at_end || o.violations > 0) {
            return {false, "seed " + std::to_string(s) + ": " + std::to_string(o.violations) +
                               " late ticks, worst silence " + num(o.worst_silence_ms) + " ms"};
        }
    }
    return {true, std::to_string(seeds) + " seeds, longest silence with an axis on " + num(worst) +
                      " ms (limit 1500 + 5)"};
}

Outcome protocol_round_trip() {
    properties::ProtocolStats st;
    const auto v = properties::protocol_suite(200000, 17, st);
    if (v) return {false, *v};
    if (st.recovered_after_corruption != st.corruptions) return {false, "a frame after corruption was lost"};
    return {true, std::to_string(st.frames) + " frames, " + std::to_string(st.corruptions) +
                      " corruptions, all following frames recovered"};
}

std::map<std::string, std::string> csv_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), root).string()] = ss.str();
    }
    return out;
}

Outcome rerun_determinism(const std::string& cli) {
    if (cli.empty()) return {false, "no --cli given"};
    const auto base = fs::temp_directory_path() / "teleprobe_acceptance_rerun";
    fs::remove_all(base);
    for (const char* run : {"a", "b"}) {
        const auto out = (base / run).string();
        for (const char* exp : {"exp1", "exp2", "exp3"}) {
            const std::string cmd = "TELEPROBE_VIRTUAL_TIME=1 '" + cli + "' " + exp + " --seed 1 --out '" + out +
                                    "' --log-file '" + (base / "log.jsonl").string() + "' > /dev/null";
            if (const int rc = std::system(cmd.c_str()); rc != 0) {
                return {false, std::string(exp) + " exited with status " + std::to_string(rc)};
            }
        }
    }
    const auto a = csv_tree(base / "a");
    const auto b = csv_tree(base / "b");
    if (a.empty()) return {false, "no CSV files written"};
    if (a.size() != b.size()) return {false, "file sets differ"};
    std::size_t bytes = 0;
    for (const auto& [name, data] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != data) return {false, name + " differs"};
        bytes += data.size();
    }
    fs::remove_all(base);
    return {true, std::to_string(a.size()) + " CSV files, " + std::to_string(bytes) + " bytes identical"};
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 deadband recovery from the hysteresis sweep", exp2_deadbands},
        {"2 play operator properties and brute-force oracle", play_operator},
        {"3 AP/STA equivalence", ap_sta},
        {"4 target task orderings over seeds 1-20", exp3_orderings},
        {"5 descriptive statistics and Welch battery", statistics},
        {"6 failsafe release after link loss", failsafe},
        {"7 protocol round-trip and resynchronization", protocol_round_trip},
        {"8 byte-identical CSVs on rerun", [&] { return rerun_determinism(cli); }},
    };

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
