// teleprobe: services (robot, relay, operate), experiments (exp1-exp3) and
// report checking.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "teleprobe/harness/exp1.hpp"
#include "teleprobe/harness/exp2.hpp"
#include "teleprobe/harness/exp3.hpp"
#include "teleprobe/harness/report.hpp"
#include "teleprobe/net/services.hpp"
#include "teleprobe/probe/calibration.hpp"

#ifndef TELEPROBE_DATA_DIR
#define TELEPROBE_DATA_DIR "."
#endif

namespace fs = std::filesystem;
using namespace teleprobe;

namespace {

enum Exit { ok = 0, config = 2, service = 3, threshold = 4 };

struct Options {
    std::string mode = "ap";
    int port = 0;  // 0: the service's default
    std::string relay = "127.0.0.1:7400";
    std::string session = "default";
    std::vector<std::string> presets;
    std::string calib;
    std::vector<std::string> profiles;
    std::vector<std::string> scripts;
    std::string seed = "1";
    std::string out = "out";
    bool wall_clock = false;
    std::string log_file;
    std::string assets;
    bool traces = true;
    bool check = false;
    std::vector<std::string> report_paths;
};

bool env_virtual_time() {
    const char* v = std::getenv("TELEPROBE_VIRTUAL_TIME");
    return v && std::string(v) == "1";
}

/// Explicit path, else calib/default.json in the working directory, else the
/// copy in the source tree.
std::string calib_path(const Options& o) {
    if (!o.calib.empty()) return o.calib;
    if (fs::exists("calib/default.json")) return "calib/default.json";
    return std::string(TELEPROBE_DATA_DIR) + "/calib/default.json";
}

std::string assets_path(const Options& o) {
    if (!o.assets.empty()) return o.assets;
    const fs::path built = fs::path(TELEPROBE_DATA_DIR) / "web" / "dist";
    return fs::exists(built) ? built.string() : std::string();
}

/// "7", "1-20", "1,3,9" or a mix ("1-3,7").
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string part;
    auto num = [&](const std::string& t) -> std::uint64_t {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            throw config_error("bad seed list '" + s + "'");
        }
        return std::stoull(t);
    };
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(num(part));
            continue;
        }
        const auto lo = num(part.substr(0, dash));
        const auto hi = num(part.substr(dash + 1));
        if (hi < lo || hi - lo > 100000) throw config_error("bad seed range '" + part + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw config_error("no seeds given");
    return out;
}

std::uint64_t single_seed(const Options& o) {
    const auto seeds = parse_seeds(o.seed);
    if (seeds.size() != 1) throw config_error("this command takes one seed");
    return seeds[0];
}

net::Mode parse_mode(const std::string& m) {
    if (m == "ap" || m == "AP") return net::Mode::AP;
    if (m == "sta" || m == "STA") return net::Mode::STA;
    throw config_error("--mode must be ap or sta");
}

/// Event log sink: --log-file if given, else stderr.
struct LogSink {
    std::ofstream file;
    net::EventLog log;

    explicit LogSink(const Options& o, bool to_stderr) {
        if (!o.log_file.empty()) {
            file.open(o.log_file, std::ios::app);
            if (!file) throw config_error("cannot open log file '" + o.log_file + "'");
            log.set_sink(&file);
        } else if (to_stderr) {
            log.set_sink(&std::cerr);
        }
        log.set_keep(false);
    }
};

bool use_virtual_time(const Options& o) {
    if (o.wall_clock && env_virtual_time()) {
        throw config_error("--wall-clock conflicts with TELEPROBE_VIRTUAL_TIME=1");
    }
    return !o.wall_clock;
}

void require_wall_clock_service(const char* what) {
    if (env_virtual_time()) {
        throw config_error(std::string(what) +
                           " is a network service and runs on wall-clock time; unset TELEPROBE_VIRTUAL_TIME");
    }
}

// ---- services ---------------------------------------------------------------

int cmd_robot(const Options& o) {
    require_wall_clock_service("robot");
    net::install_signal_handlers();
    const auto cal = probe::load_calibration(calib_path(o));
    LogSink sink(o, true);
    net::RobotConfig rc;
    rc.mode = parse_mode(o.mode);
    rc.session = o.session;
    rc.imu_seed = single_seed(o);
    net::ServiceOptions so;
    so.port = o.port ? o.port : net::default_robot_port;
    so.assets = assets_path(o);
    if (rc.mode == net::Mode::STA) {
        std::tie(so.relay_host, so.relay_port) = net::parse_endpoint(o.relay, net::default_relay_port);
    }
    net::PollLoop loop;
    net::RobotService svc(loop, cal, rc, so, &sink.log);
    sink.log.emit(loop.now_ms(), "listening",
                  {{"port", rc.mode == net::Mode::AP ? svc.port() : 0}, {"console_port", svc.console_port()}});
    loop.run();
    if (svc.failed()) {
        std::cerr << "teleprobe robot: " << svc.failure() << '\n';
        return service;
    }
    return ok;
}

int cmd_relay(const Options& o) {
    require_wall_clock_service("relay");
    net::install_signal_handlers();
    LogSink sink(o, true);
    const auto preset = o.presets.empty() ? std::string("none") : o.presets.front();
    const auto model = net::impairment_preset(preset, single_seed(o));
    net::ServiceOptions so;
    so.port = o.port ? o.port : net::default_relay_port;
    so.assets = assets_path(o);
    net::PollLoop loop;
    net::RelayService svc(loop, harness::direction_model(model, false), harness::direction_model(model, true), so,
                          &sink.log);
    sink.log.emit(loop.now_ms(), "listening",
                  {{"port", svc.port()}, {"console_port", svc.console_port()}, {"preset", preset}});
    loop.run();
    return ok;
}

nlohmann::ordered_json segment_json(std::size_t index, const stats::SegmentRecord& r) {
    return {{"segment", index},
            {"target_deg", r.target_deg},
            {"start_deg", r.start_deg},
            {"final_deg", r.final_deg},
            {"error_deg", r.error_deg},
            {"max_overshoot_deg", r.max_overshoot_deg},
            {"duration_s", r.duration_s},
            {"reversal_in_deadband_count", r.reversal_in_deadband_count},
            {"aborted", r.aborted}};
}

/// Runs one operator through one script. Wall-clock by default against a
/// running robot or relay; with TELEPROBE_VIRTUAL_TIME=1 against an
/// in-process rig.
int cmd_operate(const Options& o) {
    const auto cal = probe::load_calibration(calib_path(o));
    const auto profile = op::resolve_profile(o.profiles.empty() ? "gamepad" : o.profiles.front());
    const auto script = op::resolve_script(o.scripts.empty() ? "lr_default" : o.scripts.front());
    op::validate_script(script, cal);
    const auto seed = single_seed(o);
    const auto mode = parse_mode(o.mode);
    std::size_t printed = 0;
    auto print = [&](const stats::SegmentRecord& r) {
        std::cout << segment_json(printed++, r).dump() << std::endl;
    };

    if (env_virtual_time()) {
        if (o.wall_clock) throw config_error("--wall-clock conflicts with TELEPROBE_VIRTUAL_TIME=1");
        harness::Condition cond{profile, mode, o.presets.empty() ? "none" : o.presets.front()};
        const auto tr = harness::run_trial(cal, cond, profile, script, seed);
        for (const auto& r : tr.records) print(r);
        return tr.aborted ? service : ok;
    }

    LogSink sink(o, true);
    net::install_signal_handlers();
    net::PollLoop loop;
    std::shared_ptr<net::TcpConnection> conn;
    try {
        if (mode == net::Mode::AP) {
            conn = net::tcp_connect(loop, "127.0.0.1", o.port ? o.port : net::default_robot_port);
        } else {
            const auto [host, port] = net::parse_endpoint(o.relay, net::default_relay_port);
            conn = net::tcp_connect(loop, host, port);
        }
    } catch (const service_error& e) {
        std::cerr << "teleprobe operate: " << e.what() << '\n';
        return service;
    }
    op::OperatorClient client(loop, conn, {o.session, protocol::Role::Operator, 1000, 3000});
    bool refused = false;
    client.on_error([&](const protocol::Error& e) {
        sink.log.emit(loop.now_ms(), "remote_error", {{"code", e.code}, {"detail", e.detail}});
        if (e.code == "busy" || e.code == "nosession" || e.code == "version") refused = true;
    });
    client.start();
    loop.run_while_not([&] { return client.acknowledged() || refused || !conn->is_open(); },
                       loop.now_us() + net::ms_to_us(5000.0));
    if (!client.acknowledged()) {
        std::cerr << "teleprobe operate: robot did not accept the session\n";
        return service;
    }
    op::TargetTaskRunner runner(loop, client, profile, script, seed);
    runner.on_segment([&](const stats::SegmentRecord& r) {
        // Over the network the plant's deadband is not observable; estimate from the trace.
        auto copy = r;
        copy.reversal_in_deadband_count = stats::estimate_deadband_reversals(r.trace);
        print(copy);
    });
    runner.start();
    loop.run_while_not([&] { return runner.done(); }, std::numeric_limits<net::Micros>::max());
    client.stop();
    conn->close();
    return runner.done() && !runner.aborted() ? ok : service;
}

// ---- experiments ------------------------------------------------------------

nlohmann::ordered_json base_config(const Options& o, const std::string& calib, bool virtual_time) {
    return {{"calib", calib}, {"seed", o.seed}, {"virtual_time", virtual_time}};
}

nlohmann::ordered_json ordered(const nlohmann::json& j) { return nlohmann::ordered_json::parse(j.dump()); }

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int finish(const fs::path& dir, const std::vector<harness::Check>& checks) {
    std::cout << "wrote " << (dir / "report.json").string() << '\n';
    for (const auto& c : checks) {
        std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")")
                  << '\n';
    }
    return ok;
}

int cmd_exp1(const Options& o) {
    const bool vt = use_virtual_time(o);
    const auto calib = calib_path(o);
    const auto cal = probe::load_calibration(calib);
    const auto seed = single_seed(o);
    const auto presets = o.presets.empty() ? std::vector<std::string>{"none", "lan", "5g"} : o.presets;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<harness::Exp1Result> results;
    std::int64_t virtual_ms = 0;
    for (const auto& p : presets) {
        results.push_back(harness::run_exp1(cal, p, seed, !vt));
        for (const auto* runs : {&results.back().ap, &results.back().sta}) {
            for (const auto& r : *runs) virtual_ms += r.trajectory.empty() ? 0 : r.trajectory.back().ts_ms;
        }
    }
    harness::RunMeta meta{"exp1", base_config(o, calib, vt), virtual_ms, elapsed_ms(t0)};
    meta.config["presets"] = presets;
    const auto dir = fs::path(o.out) / "exp1" / harness::seed_dir_name({seed});
    harness::write_exp1(dir, meta, results);
    return finish(dir, harness::exp1_checks(results));
}

int cmd_exp2(const Options& o) {
    const bool vt = use_virtual_time(o);
    const auto calib = calib_path(o);
    const auto cal = probe::load_calibration(calib);
    const auto seed = single_seed(o);
    harness::Exp2Options eo;
    eo.imu_seed = seed;
    eo.wall_clock = !vt;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = harness::run_exp2(cal, eo);
    harness::RunMeta meta{"exp2", base_config(o, calib, vt), r.virtual_ms, elapsed_ms(t0)};
    meta.config["interval_steps"] = eo.interval_steps;
    meta.config["dwell_ms"] = eo.dwell_ms;
    meta.config["repeats"] = eo.repeats;
    const auto dir = fs::path(o.out) / "exp2" / harness::seed_dir_name({seed});
    harness::write_exp2(dir, meta, r);
    return finish(dir, harness::exp2_checks(r));
}

/// Built-in conditions, or one per --profile. --mode/--preset override the
/// link for every condition when given.
std::vector<harness::Condition> exp3_conditions(const Options& o, bool mode_given) {
    std::vector<harness::Condition> conds;
    if (o.profiles.empty()) {
        conds = harness::default_conditions();
    } else {
        const auto defaults = harness::default_conditions();
        for (const auto& name : o.profiles) {
            harness::Condition c{op::resolve_profile(name), net::Mode::STA, "5g"};
            for (const auto& d : defaults) {
                if (d.profile.name == c.profile.name) c = {c.profile, d.mode, d.preset};
            }
            conds.push_back(c);
        }
    }
    for (auto& c : conds) {
        if (mode_given) c.mode = parse_mode(o.mode);
        if (!o.presets.empty()) c.preset = o.presets.front();
        net::impairment_preset(c.preset);  // validates the name
    }
    return conds;
}

int cmd_exp3(const Options& o, bool mode_given) {
    const bool vt = use_virtual_time(o);
    const auto calib = calib_path(o);
    const auto cal = probe::load_calibration(calib);
    const auto seeds = parse_seeds(o.seed);
    const auto conds = exp3_conditions(o, mode_given);
    std::vector<op::TargetScript> scripts;
    for (const auto& s : o.scripts.empty() ? std::vector<std::string>{"lr_default", "ud_default"} : o.scripts) {
        scripts.push_back(op::resolve_script(s));
    }
    const auto dir = fs::path(o.out) / "exp3" / harness::seed_dir_name(seeds);
    const auto trace_dir = dir / "traces";
    if (o.traces) fs::create_directories(trace_dir);

    const auto t0 = std::chrono::steady_clock::now();
    std::int64_t virtual_ms = 0;
    auto observer = [&](const harness::Exp3Cell& cell, std::uint64_t seed, int p, int t,
                        const harness::TrialResult& tr) {
        virtual_ms += tr.virtual_ms;
        if (o.traces) {
            harness::write_trial_trace(trace_dir / harness::trace_file_name(cell.condition, cell.axis, seed, p, t),
                                       tr.records);
        }
    };
    const auto r = harness::run_exp3(cal, conds, scripts, seeds, observer, !vt);

    harness::RunMeta meta{"exp3", base_config(o, calib, vt), virtual_ms, elapsed_ms(t0)};
    auto cj = nlohmann::ordered_json::array();
    for (const auto& c : conds) {
        cj.push_back({{"profile", ordered(nlohmann::json(c.profile))}, {"mode", c.mode == net::Mode::AP ? "ap" : "sta"}, {"preset", c.preset}});
    }
    meta.config["conditions"] = cj;
    meta.config["scripts"] = ordered(nlohmann::json(scripts));
    meta.config["participants_per_cell"] = harness::participants_per_cell;
    meta.config["trials_per_participant"] = harness::trials_per_participant;
    harness::write_exp3(dir, meta, r);
    return finish(dir, harness::exp3_checks(r));
}

/// Prints the checks of every report.json under the given paths; with
/// --check, a failed check makes the exit status 4.
int cmd_report(const Options& o) {
    std::vector<fs::path> reports;
    const auto roots = o.report_paths.empty() ? std::vector<std::string>{o.out} : o.report_paths;
    for (const auto& root : roots) {
        const fs::path p(root);
        if (fs::is_regular_file(p)) {
            reports.push_back(p);
        } else if (fs::is_directory(p)) {
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (e.is_regular_file() && e.path().filename() == "report.json") reports.push_back(e.path());
            }
        } else {
            throw config_error("no report at '" + root + "'");
        }
    }
    if (reports.empty()) throw config_error("no report.json found");
    std::sort(reports.begin(), reports.end());
    bool all = true;
    for (const auto& rp : reports) {
        const auto checks = harness::read_checks(rp);
        std::cout << rp.string() << '\n';
        for (const auto& c : checks) {
            all = all && c.pass;
            std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name
                      << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
        }
    }
    return o.check && !all ? threshold : ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teleoperated TEE probe twin: services, experiments and reports"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--calib", o.calib, "calibration JSON (default calib/default.json)");
        sc->add_option("--seed", o.seed, "seed; exp3 also takes lists and ranges such as 1-20");
        sc->add_option("--log-file", o.log_file, "append the JSON-lines event log here instead of stderr");
    };
    auto add_link = [&](CLI::App* sc) {
        sc->add_option("--mode", o.mode, "ap (direct) or sta (through a relay)")->check(CLI::IsMember({"ap", "sta", "AP", "STA"}));
        sc->add_option("--port", o.port, "TCP port (robot 7332, relay 7400; console on port + 1)");
        sc->add_option("--relay", o.relay, "relay address host:port for sta mode");
        sc->add_option("--session", o.session, "session name shared by robot and operators");
    };

    auto* robot = app.add_subcommand("robot", "run the robot service");
    add_common(robot);
    add_link(robot);
    robot->add_option("--assets", o.assets, "directory of console files served on port + 1");

    auto* relay = app.add_subcommand("relay", "run the cloud relay");
    add_common(relay);
    relay->add_option("--port", o.port, "TCP port (console on port + 1)");
    relay->add_option("--preset", o.presets, "impairment preset for both directions: none, lan, 5g")->expected(1);
    relay->add_option("--assets", o.assets, "directory of console files served on port + 1");

    auto* operate = app.add_subcommand("operate", "run one scripted operator against a robot or relay");
    add_common(operate);
    add_link(operate);
    operate->add_option("--profile", o.profiles, "built-in profile name or JSON file")->expected(1);
    operate->add_option("--script", o.scripts, "lr_default, ud_default or a JSON file")->expected(1);
    operate->add_option("--preset", o.presets, "link preset (virtual time only)")->expected(1);
    operate->add_flag("--wall-clock", o.wall_clock, "accepted for symmetry; operate is wall-clock unless virtual");

    auto* exp1 = app.add_subcommand("exp1", "AP vs STA completion times for the built-in sequences");
    add_common(exp1);
    exp1->add_option("--preset", o.presets, "impairment presets to run (default: none lan 5g)");
    exp1->add_option("--out", o.out, "output root");
    exp1->add_flag("--wall-clock", o.wall_clock, "pace the run in real time");

    auto* exp2 = app.add_subcommand("exp2", "hysteresis sweeps and deadband extraction");
    add_common(exp2);
    exp2->add_option("--out", o.out, "output root");
    exp2->add_flag("--wall-clock", o.wall_clock, "pace the run in real time");

    auto* exp3 = app.add_subcommand("exp3", "target-reaching task for every condition and axis");
    add_common(exp3);
    exp3->add_option("--mode", o.mode, "override the link mode of every condition")->check(CLI::IsMember({"ap", "sta", "AP", "STA"}));
    exp3->add_option("--preset", o.presets, "override the link preset of every condition")->expected(1);
    exp3->add_option("--profile", o.profiles, "conditions to run (default: manual gamepad joystick)");
    exp3->add_option("--script", o.scripts, "scripts to run (default: lr_default ud_default)");
    exp3->add_option("--out", o.out, "output root");
    exp3->add_flag("--wall-clock", o.wall_clock, "pace the run in real time");
    exp3->add_flag("!--no-traces", o.traces, "skip the per-trial trace files");

    auto* report = app.add_subcommand("report", "print the checks in report.json files");
    report->add_option("paths", o.report_paths, "report.json files or directories (default: --out)");
    report->add_option("--out", o.out, "output root to scan");
    report->add_flag("--check", o.check, "exit 4 if any check failed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config;
    }

    try {
        if (*robot) return cmd_robot(o);
        if (*relay) return cmd_relay(o);
        if (*operate) return cmd_operate(o);
        if (*exp1) return cmd_exp1(o);
        if (*exp2) return cmd_exp2(o);
        if (*exp3) return cmd_exp3(o, exp3->count("--mode") > 0);
        if (*report) return cmd_report(o);
    } catch (const config_error& e) {
        std::cerr << "teleprobe: " << e.what() << '\n';
        return config;
    } catch (const calibration_error& e) {
        std::cerr << "teleprobe: calibration: " << e.what() << '\n';
        return config;
    } catch (const service_error& e) {
        std::cerr << "teleprobe: " << e.what() << '\n';
        return service;
    } catch (const std::exception& e) {
        std::cerr << "teleprobe: " << e.what() << '\n';
        return service;
    }
    return ok;
}
