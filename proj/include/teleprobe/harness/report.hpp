#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleprobe/harness/exp1.hpp"
#include "teleprobe/harness/exp2.hpp"
#include "teleprobe/harness/exp3.hpp"
#include "teleprobe/stats/csv.hpp"

namespace teleprobe::harness {

namespace fs = std::filesystem;
using stats::fmt_num;

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline bool all_pass(const std::vector<Check>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass; });
}

inline std::string axis_name(probe::AxisId a) { return std::string(probe::wire_code(a)); }

// ---- checks ---------------------------------------------------------------

inline double relative_difference(const SequenceRun& ap, const SequenceRun& sta) {
    return std::fabs(ap.completion_ms - sta.completion_ms) / ap.completion_ms;
}

/// Per preset: every sequence completes, AP and STA completion times agree
/// within 5%, and the probe trajectories are identical.
inline std::vector<Check> exp1_checks(const std::vector<Exp1Result>& results) {
    std::vector<Check> out;
    for (const auto& r : results) {
        const auto n = std::min(r.ap.size(), r.sta.size());
        bool done = r.ap.size() == 5 && r.sta.size() == 5;
        bool same = done;
        double worst = 0.0;
        std::string first_diff;
        for (std::size_t i = 0; i < n; ++i) {
            done = done && r.ap[i].completed && r.sta[i].completed;
            worst = std::max(worst, relative_difference(r.ap[i], r.sta[i]));
            if (r.ap[i].trajectory != r.sta[i].trajectory) {
                same = false;
                if (first_diff.empty()) first_diff = r.ap[i].name;
            }
        }
        out.push_back({"all_sequences_completed_" + r.preset, done,
                       std::to_string(r.ap.size()) + " AP, " + std::to_string(r.sta.size()) + " STA"});
        out.push_back({"ap_sta_time_rel_diff_lt_5pct_" + r.preset, done && worst < 0.05, "max " + fmt_num(worst)});
        out.push_back({"ap_sta_trajectories_identical_" + r.preset, same,
                       first_diff.empty() ? "" : "first difference in " + first_diff});
    }
    return out;
}

inline std::vector<Check> exp2_checks(const Exp2Result& r) {
    std::vector<Check> out;
    for (const auto& a : r.axes) {
        const auto& d = a.deadband;
        if (a.axis == probe::AxisId::SteerLR) {
            out.push_back({"lr_max_gap_1200_pm_200", std::fabs(d.max_gap - 1200.0) <= 200.0, fmt_num(d.max_gap)});
        } else {
            out.push_back(
                {"ud_neutral_gap_640_pm_200", std::fabs(d.neutral_gap - 640.0) <= 200.0, fmt_num(d.neutral_gap)});
            const bool zone_ok = d.zone_lo <= d.zone_hi && d.zone_lo >= 1600.0 && d.zone_hi <= 4400.0;
            out.push_back({"ud_zone_within_1600_4400", zone_ok, fmt_num(d.zone_lo) + ".." + fmt_num(d.zone_hi)});
        }
    }
    // Not reachable at the default rate and dwell; kept so the gap stays visible.
    out.push_back({"virtual_runtime_lt_10s", r.virtual_ms < 10000, std::to_string(r.virtual_ms) + " ms"});
    return out;
}

inline std::vector<Check> exp3_checks(const Exp3Result& r) {
    std::vector<Check> out;
    bool n_ok = true;
    std::string n_detail;
    for (const auto& c : r.cells) {
        for (auto seed : r.seeds) {
            const auto n = c.count_for_seed(seed);
            if (n != 90) {
                n_ok = false;
                n_detail = c.condition + "/" + axis_name(c.axis) + " seed " + std::to_string(seed) + ": " +
                           std::to_string(n);
            }
        }
    }
    out.push_back({"n_90_per_cell_and_seed", n_ok, n_detail});

    const std::vector<std::string> order{"manual", "gamepad", "joystick"};
    const std::vector<probe::AxisId> axes{probe::AxisId::SteerLR, probe::AxisId::SteerUD};
    auto have = [&](const std::string& cond, probe::AxisId a) { return r.cell(cond, a) != nullptr; };

    for (auto axis : axes) {
        if (!std::all_of(order.begin(), order.end(), [&](const auto& c) { return have(c, axis); })) continue;
        const double m = summarize(*r.cell("manual", axis)).time.median();
        const double g = summarize(*r.cell("gamepad", axis)).time.median();
        const double j = summarize(*r.cell("joystick", axis)).time.median();
        out.push_back({"median_time_manual_lt_gamepad_lt_joystick_" + axis_name(axis), m < g && g < j,
                       fmt_num(m) + " < " + fmt_num(g) + " < " + fmt_num(j)});
    }
    for (const auto& c : r.cells) {
        const double e = summarize(c).error.mean();
        out.push_back({"mean_error_le_1deg_" + c.condition + "_" + axis_name(c.axis), e <= 1.0, fmt_num(e)});
    }
    for (const auto& cond : order) {
        if (!have(cond, probe::AxisId::SteerLR) || !have(cond, probe::AxisId::SteerUD)) continue;
        const auto lr = summarize(*r.cell(cond, probe::AxisId::SteerLR));
        const auto ud = summarize(*r.cell(cond, probe::AxisId::SteerUD));
        out.push_back({"reversals_ud_ge_lr_" + cond, ud.mean_reversals >= lr.mean_reversals,
                       fmt_num(ud.mean_reversals) + " >= " + fmt_num(lr.mean_reversals)});
        const bool cov_ok = ud.time.has_cov() && lr.time.has_cov() && ud.time.cov() > lr.time.cov();
        out.push_back({"time_cov_ud_gt_lr_" + cond, cov_ok,
                       (ud.time.has_cov() ? fmt_num(ud.time.cov()) : "n/a") + " > " +
                           (lr.time.has_cov() ? fmt_num(lr.time.cov()) : "n/a")});
    }
    return out;
}

// ---- output ---------------------------------------------------------------

/// `seed-7` for one seed, `seed-1-20` for a contiguous range, else `seed-1_4_9`.
inline std::string seed_dir_name(const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() == 1) return "seed-" + std::to_string(seeds[0]);
    bool contiguous = true;
    for (std::size_t i = 1; i < seeds.size(); ++i) contiguous = contiguous && seeds[i] == seeds[i - 1] + 1;
    if (contiguous) return "seed-" + std::to_string(seeds.front()) + "-" + std::to_string(seeds.back());
    std::string s = "seed-";
    for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "_" : "") + std::to_string(seeds[i]);
    return s;
}

struct RunMeta {
    std::string experiment;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::int64_t virtual_ms = 0;
    double wall_ms = 0.0;
};

inline std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
}

inline nlohmann::ordered_json checks_json(const std::vector<Check>& cs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return arr;
}

inline void write_report_json(const fs::path& dir, const RunMeta& meta, const std::vector<Check>& checks,
                              nlohmann::ordered_json results) {
    nlohmann::ordered_json j;
    j["experiment"] = meta.experiment;
    j["config"] = meta.config;
    j["checks"] = checks_json(checks);
    j["all_pass"] = all_pass(checks);
    j["results"] = std::move(results);
    j["virtual_ms"] = meta.virtual_ms;
    j["wall_ms"] = meta.wall_ms;
    auto out = open_out(dir / "report.json");
    out << j.dump(2) << '\n';
}

inline void write_exp1(const fs::path& dir, const RunMeta& meta, const std::vector<Exp1Result>& results) {
    fs::create_directories(dir);
    const auto checks = exp1_checks(results);
    auto out = open_out(dir / "times.csv");
    out << "preset,sequence,ap_ms,sta_ms,diff_ms,rel_diff\n";
    auto traj = open_out(dir / "trajectories.csv");
    traj << "preset,sequence,mode,ts_ms,translation_steps,rotation_steps,lr_steps,ud_steps,lr_tip_deg,ud_tip_deg\n";
    auto res = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < r.ap.size() && i < r.sta.size(); ++i) {
            const auto& a = r.ap[i];
            const auto& s = r.sta[i];
            out << r.preset << ',' << a.name << ',' << fmt_num(a.completion_ms) << ',' << fmt_num(s.completion_ms)
                << ',' << fmt_num(s.completion_ms - a.completion_ms) << ',' << fmt_num(relative_difference(a, s))
                << '\n';
            rows.push_back({{"sequence", a.name},
                            {"ap_ms", a.completion_ms},
                            {"sta_ms", s.completion_ms},
                            {"completed", a.completed && s.completed},
                            {"trajectory_points", a.trajectory.size()}});
            for (const auto* run : {&a, &s}) {
                for (const auto& p : run->trajectory) {
                    traj << r.preset << ',' << run->name << ',' << (run == &a ? "ap" : "sta") << ',' << p.ts_ms;
                    for (auto v : p.positions) traj << ',' << v;
                    traj << ',' << fmt_num(p.lr_tip_deg) << ',' << fmt_num(p.ud_tip_deg) << '\n';
                }
            }
        }
        res.push_back({{"preset", r.preset}, {"sequences", rows}});
    }
    write_report_json(dir, meta, checks, {{"presets", res}});
}

inline void write_exp2(const fs::path& dir, const RunMeta& meta, const Exp2Result& r) {
    fs::create_directories(dir);
    const auto checks = exp2_checks(r);
    auto curve = open_out(dir / "hysteresis.csv");
    curve << "axis,direction,steps,angle_deg\n";
    auto gaps = open_out(dir / "deadband.csv");
    gaps << "axis,steps,gap_steps\n";
    auto res = nlohmann::ordered_json::array();
    for (const auto& a : r.axes) {
        for (const auto* rec : {&a.up, &a.down}) {
            for (const auto& [s, y] : rec->samples) {
                curve << axis_name(a.axis) << ',' << (rec->direction > 0 ? "up" : "down") << ',' << s << ','
                      << fmt_num(y) << '\n';
            }
        }
        for (const auto& [s, g] : a.deadband.gaps) gaps << axis_name(a.axis) << ',' << s << ',' << fmt_num(g) << '\n';
        const auto& d = a.deadband;
        nlohmann::ordered_json row{{"axis", axis_name(a.axis)},
                                   {"max_gap_steps", d.max_gap},
                                   {"neutral_gap_steps", d.neutral_gap},
                                   {"neutral_level_deg", d.neutral_level_deg}};
        if (d.zone_lo <= d.zone_hi) {
            row["zone_steps"] = {d.zone_lo, d.zone_hi};
        } else {
            row["zone_steps"] = nullptr;
        }
        row["warnings"] = d.warnings;
        res.push_back(row);
    }
    write_report_json(dir, meta, checks, {{"axes", res}});
}

inline void write_trial_trace(const fs::path& path, const std::vector<stats::SegmentRecord>& recs) {
    auto out = open_out(path);
    out << "segment,target_deg," << stats::trace_header << '\n';
    for (std::size_t i = 0; i < recs.size(); ++i) {
        for (const auto& p : recs[i].trace) {
            out << i << ',' << fmt_num(recs[i].target_deg) << ',' << p.ts_ms << ',' << fmt_num(p.angle_deg) << ','
                << p.cmd_dir << ',' << (p.cmd_on ? 1 : 0) << '\n';
        }
    }
}

inline std::string trace_file_name(const std::string& cond, probe::AxisId axis, std::uint64_t seed, int p, int t) {
    return cond + "_" + axis_name(axis) + "_seed" + std::to_string(seed) + "_p" + std::to_string(p + 1) + "_t" +
           std::to_string(t + 1) + ".csv";
}

/// Table 1 layout plus long-form summaries, Welch tests, every segment and,
/// when `traces` is set, one trace file per trial (written by the caller's
/// observer as trials finish; see trace_file_name).
inline void write_exp3(const fs::path& dir, const RunMeta& meta, const Exp3Result& r) {
    fs::create_directories(dir);
    const auto checks = exp3_checks(r);

    auto table = open_out(dir / "table1.csv");
    table << "condition,axis,n,aborted,error_mean,error_std,overshoot_mean,overshoot_std,time_median,time_iqr,"
             "time_cov,reversals_mean\n";
    auto summary = open_out(dir / "summary.csv");
    summary << stats::summary_header << '\n';
    auto cells = nlohmann::ordered_json::array();
    auto opt = [](const stats::StatsSummary& s, double (stats::StatsSummary::*f)() const, bool ok) {
        return ok ? fmt_num((s.*f)()) : std::string();
    };
    for (const auto& c : r.cells) {
        const auto s = summarize(c);
        const auto ax = axis_name(c.axis);
        table << c.condition << ',' << ax << ',' << s.n << ',' << s.aborted << ',' << fmt_num(s.error.mean()) << ','
              << opt(s.error, &stats::StatsSummary::std, s.error.has_std()) << ',' << fmt_num(s.overshoot.mean())
              << ',' << opt(s.overshoot, &stats::StatsSummary::std, s.overshoot.has_std()) << ','
              << fmt_num(s.time.median()) << ',' << opt(s.time, &stats::StatsSummary::iqr, s.time.has_std()) << ','
              << opt(s.time, &stats::StatsSummary::cov, s.time.has_cov()) << ',' << fmt_num(s.mean_reversals) << '\n';
        stats::write_summary_row(summary, c.condition, ax, "error_deg", s.error);
        stats::write_summary_row(summary, c.condition, ax, "max_overshoot_deg", s.overshoot);
        stats::write_summary_row(summary, c.condition, ax, "duration_s", s.time);
        nlohmann::ordered_json cj{{"condition", c.condition}, {"axis", ax},
                                  {"n", s.n},                 {"aborted", s.aborted},
                                  {"error_mean", s.error.mean()},
                                  {"overshoot_mean", s.overshoot.mean()},
                                  {"time_median", s.time.median()},
                                  {"reversals_mean", s.mean_reversals}};
        cj["time_cov"] = s.time.has_cov() ? nlohmann::ordered_json(s.time.cov()) : nlohmann::ordered_json(nullptr);
        cells.push_back(cj);
    }

    auto welch = open_out(dir / "welch.csv");
    welch << "axis,a,b,t,dof,p\n";
    auto wj = nlohmann::ordered_json::array();
    for (const auto& w : welch_table(r)) {
        welch << axis_name(w.axis) << ',' << w.a << ',' << w.b << ',';
        if (w.result) {
            welch << fmt_num(w.result->t) << ',' << fmt_num(w.result->dof) << ',' << fmt_num(w.result->p);
            wj.push_back({{"axis", axis_name(w.axis)}, {"a", w.a}, {"b", w.b}, {"t", w.result->t},
                          {"dof", w.result->dof}, {"p", w.result->p}});
        } else {
            welch << ",,";
        }
        welch << '\n';
    }

    auto seg = open_out(dir / "segments.csv");
    seg << "condition,axis,seed,participant,trial,segment,target_deg,start_deg,final_deg,error_deg,"
           "max_overshoot_deg,duration_s,reversal_in_deadband_count,aborted\n";
    for (const auto& c : r.cells) {
        for (const auto& row : c.rows) {
            const auto& x = row.record;
            seg << c.condition << ',' << axis_name(c.axis) << ',' << row.seed << ',' << row.participant + 1 << ','
                << row.trial + 1 << ',' << row.index << ',' << fmt_num(x.target_deg) << ',' << fmt_num(x.start_deg)
                << ',' << fmt_num(x.final_deg) << ',' << fmt_num(x.error_deg) << ',' << fmt_num(x.max_overshoot_deg)
                << ',' << fmt_num(x.duration_s) << ',' << x.reversal_in_deadband_count << ',' << (x.aborted ? 1 : 0)
                << '\n';
        }
    }
    write_report_json(dir, meta, checks, {{"cells", cells}, {"welch", wj}});
}

/// Loads a report.json and returns its checks.
inline std::vector<Check> read_checks(const fs::path& report) {
    std::ifstream in(report);
    if (!in) throw config_error("cannot open '" + report.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("'" + report.string() + "': " + e.what());
    }
    std::vector<Check> out;
    for (const auto& c : j.at("checks")) {
        out.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(), c.value("detail", "")});
    }
    return out;
}

} // namespace teleprobe::harness
