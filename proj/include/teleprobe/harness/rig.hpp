#pragma once

#include <memory>
#include <optional>
#include <string>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/connection.hpp"
#include "teleprobe/net/event_log.hpp"
#include "teleprobe/net/posix.hpp"
#include "teleprobe/net/relay.hpp"
#include "teleprobe/net/robot.hpp"

namespace teleprobe::harness {

struct RigOptions {
    net::Mode mode = net::Mode::AP;
    /// Applied to the operator link: the direct link in AP mode, the relay's
    /// forwarding path in STA mode.
    net::ImpairmentModel impairment;
    std::string session = "default";
    std::uint64_t imu_seed = 1;
    double imu_sigma_deg = probe::ImuEmulator::default_sigma_deg;
    std::int64_t watchdog_ms = 1500;
    /// Pace the in-process nodes in real time instead of virtual time.
    bool wall_clock = false;
};

/// Derives the model for one direction; the two directions get unrelated streams.
inline net::ImpairmentModel direction_model(net::ImpairmentModel m, bool downstream) {
    if (downstream) m.seed = m.seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull;
    return m;
}

/// In-process robot (and relay, in STA mode) on one clock, virtual by default.
class SimRig {
public:
    SimRig(const probe::Calibration& cal, RigOptions opts)
        : opts_(std::move(opts)),
          clock_holder_(opts_.wall_clock ? std::unique_ptr<net::DrivableClock>(new net::PollLoop)
                                         : std::unique_ptr<net::DrivableClock>(new net::VirtualClock)),
          clock_(*clock_holder_) {
        net::RobotConfig rc;
        rc.mode = opts_.mode;
        rc.session = opts_.session;
        rc.imu_seed = opts_.imu_seed;
        rc.imu_sigma_deg = opts_.imu_sigma_deg;
        rc.watchdog_ms = opts_.watchdog_ms;
        robot_ = std::make_unique<net::RobotNode>(clock_, cal, rc, &log_);
        if (opts_.mode == net::Mode::STA) {
            relay_ = std::make_unique<net::RelayNode>(clock_, direction_model(opts_.impairment, false),
                                                      direction_model(opts_.impairment, true), &log_);
            auto [robot_end, relay_end] = net::VirtualEnd::make_pair(clock_, {}, {}, "robot", "relay");
            relay_->accept(relay_end);
            robot_->attach_upstream(robot_end);
            upstream_ = robot_end;
        }
        robot_->start();
    }

    SimRig(const SimRig&) = delete;
    SimRig& operator=(const SimRig&) = delete;

    /// Opens a new client connection and returns the client-side end.
    net::ConnPtr connect(const std::string& name = "operator") {
        if (opts_.mode == net::Mode::AP) {
            auto [client, server] = net::VirtualEnd::make_pair(clock_, direction_model(opts_.impairment, false),
                                                               direction_model(opts_.impairment, true), name, "robot");
            robot_->accept(server);
            return client;
        }
        auto [client, server] = net::VirtualEnd::make_pair(clock_, {}, {}, name, "relay");
        relay_->accept(server);
        return client;
    }

    net::DrivableClock& clock() noexcept { return clock_; }
    net::RobotNode& robot() noexcept { return *robot_; }
    net::RelayNode* relay() noexcept { return relay_.get(); }
    net::EventLog& log() noexcept { return log_; }
    const RigOptions& options() const noexcept { return opts_; }
    /// STA mode: the robot's end of its relay link.
    const net::ConnPtr& upstream() const noexcept { return upstream_; }

private:
    RigOptions opts_;
    std::unique_ptr<net::DrivableClock> clock_holder_;
    net::DrivableClock& clock_;
    net::EventLog log_;
    std::unique_ptr<net::RobotNode> robot_;
    std::unique_ptr<net::RelayNode> relay_;
    net::ConnPtr upstream_;
};

} // namespace teleprobe::harness
