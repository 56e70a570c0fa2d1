#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/connection.hpp"
#include "teleprobe/net/event_log.hpp"
#include "teleprobe/probe/imu.hpp"
#include "teleprobe/probe/probe.hpp"
#include "teleprobe/protocol/codec.hpp"

namespace teleprobe::net {

enum class Mode { AP, STA };

inline constexpr int default_robot_port = 7332;
inline constexpr int default_relay_port = 7400;

struct RobotConfig {
    Mode mode = Mode::AP;
    std::string session = "default";
    double telemetry_hz = 25.0;
    std::int64_t tick_ms = 5;
    std::int64_t watchdog_ms = 1500;
    std::uint64_t imu_seed = 1;
    double imu_sigma_deg = probe::ImuEmulator::default_sigma_deg;
};

/// A command as the plant saw it, with the ground truth needed for
/// oscillation analysis.
struct AppliedCommand {
    Micros at_us = 0;
    protocol::Cmd cmd;
    bool reversal = false;          // on-edge opposite to the axis' previous on-edge
    bool reversal_in_zone = false;  // ... applied where the branches differ
    bool inside_deadband = false;   // play operator strictly between branches at that moment
};

/// The robot endpoint: owns the simulated probe, applies commands, streams
/// telemetry, answers heartbeats and enforces the link-loss failsafe.
///
/// In AP mode connections come straight from operators and consoles. In STA
/// mode there is one upstream connection to the relay and everything arrives
/// through it.
class RobotNode {
public:
    using TickObserver = std::function<void(const probe::ProbeState&)>;

    RobotNode(Clock& clock, const probe::Calibration& cal, RobotConfig cfg, EventLog* log = nullptr)
        : clock_(clock),
          cal_(cal),
          cfg_(std::move(cfg)),
          log_(log),
          state_(probe::initial_state(cal)),
          imu_(cfg_.imu_seed, cfg_.imu_sigma_deg) {
        const double period_ms = 1000.0 / cfg_.telemetry_hz;
        telemetry_every_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(period_ms / cfg_.tick_ms + 0.5));
    }

    RobotNode(const RobotNode&) = delete;
    RobotNode& operator=(const RobotNode&) = delete;
    ~RobotNode() { stop(); }

    /// Starts the fixed-rate tick. The plant clock is aligned to the caller's clock.
    void start() {
        if (running_) return;
        running_ = true;
        state_.clock_ms = clock_.now_ms();
        last_rx_us_ = clock_.now_us();
        next_tick_us_ = clock_.now_us() + cfg_.tick_ms * 1000;
        schedule_tick();
        emit("robot_start", {{"mode", cfg_.mode == Mode::AP ? "ap" : "sta"}, {"session", cfg_.session}});
    }

    void stop() {
        if (!running_) return;
        running_ = false;
        clock_.cancel(tick_timer_);
    }

    /// AP mode: a new inbound connection.
    void accept(const ConnPtr& conn) {
        pending_.push_back(conn);
        std::weak_ptr<Connection> wc = conn;
        conn->on_line([this, wc](std::string_view line) {
            if (auto c = wc.lock()) handle_line(c, line);
        });
        conn->on_close([this, wc] {
            if (auto c = wc.lock()) handle_close(c);
        });
    }

    /// STA mode: the connection to the relay is up; register under our session.
    void attach_upstream(const ConnPtr& conn) {
        upstream_ = conn;
        client_attached_ = false;
        std::weak_ptr<Connection> wc = conn;
        conn->on_line([this, wc](std::string_view line) {
            if (auto c = wc.lock()) handle_line(c, line);
        });
        conn->on_close([this] {
            upstream_.reset();
            client_attached_ = false;
            failsafe("upstream_lost");
        });
        send_to(conn, protocol::Hello{protocol::Role::Robot, cfg_.session, protocol::proto_version});
    }

    bool upstream_connected() const { return upstream_ && upstream_->is_open(); }

    const probe::ProbeState& state() const noexcept { return state_; }
    const probe::Calibration& calibration() const noexcept { return cal_; }
    const RobotConfig& config() const noexcept { return cfg_; }
    const std::vector<AppliedCommand>& applied_commands() const noexcept { return applied_; }
    std::uint64_t failsafe_count() const noexcept { return failsafe_count_; }
    /// Arrival time of the last Cmd or Heartbeat from the operator.
    Micros last_rx_us() const noexcept { return last_rx_us_; }
    bool has_operator() const { return operator_ && operator_->is_open(); }
    std::size_t console_count() const { return consoles_.size(); }

    void on_tick(TickObserver obs) { tick_observer_ = std::move(obs); }

private:
    void emit(std::string_view ev, nlohmann::json fields = nlohmann::json::object()) {
        if (log_) log_->emit(clock_.now_ms(), ev, std::move(fields));
    }

    void schedule_tick() {
        tick_timer_ = clock_.call_at(next_tick_us_, [this] { tick(); });
    }

    void tick() {
        if (!running_) return;
        state_ = probe::advance(cal_, state_, cfg_.tick_ms);
        ++tick_count_;
        if (!failsafe_tripped_ && clock_.now_us() - last_rx_us_ >= cfg_.watchdog_ms * 1000) {
            failsafe_tripped_ = true;
            failsafe("watchdog");
        }
        if (tick_count_ % telemetry_every_ == 0) {
            send_telemetry();
        }
        if (tick_observer_) tick_observer_(state_);
        next_tick_us_ += cfg_.tick_ms * 1000;
        schedule_tick();
    }

    void failsafe(std::string_view reason) {
        const bool any_engaged =
            std::any_of(state_.axes.begin(), state_.axes.end(), [](const auto& m) { return m.engaged_dir != 0; });
        state_ = probe::all_off(state_);
        ++failsafe_count_;
        emit("failsafe", {{"reason", reason}, {"axes_were_engaged", any_engaged}});
    }

    void send_telemetry() {
        const bool listeners = cfg_.mode == Mode::AP ? (has_operator() || !consoles_.empty())
                                                     : (upstream_connected() && client_attached_);
        if (!listeners) return;
        const auto r = imu_.sample(probe::tip_pose(cal_, state_), clock_.now_ms());
        const std::string line =
            protocol::encode(protocol::Imu{r.roll_deg, r.pitch_deg, r.yaw_deg, r.seq, r.ts_ms});
        if (cfg_.mode == Mode::STA) {
            upstream_->send(line);
            return;
        }
        if (has_operator()) operator_->send(line);
        for (const auto& c : consoles_) {
            if (c->is_open()) c->send(line);
        }
    }

    void send_to(const ConnPtr& c, const protocol::Frame& f) {
        if (c && c->is_open()) c->send(protocol::encode(f));
    }

    void reject(const ConnPtr& c, std::string code, std::string detail, bool close) {
        emit("reject", {{"peer", c->peer()}, {"code", code}, {"detail", detail}});
        send_to(c, protocol::Error{std::move(code), std::move(detail)});
        if (close) c->close();
    }

    void handle_line(const ConnPtr& c, std::string_view line) {
        protocol::Frame f;
        try {
            f = protocol::decode(line);
        } catch (const protocol::decode_error& e) {
            reject(c, std::string(protocol::errc_code(e.code())), e.what(), false);
            return;
        }
        if (cfg_.mode == Mode::STA) {
            handle_upstream_frame(c, f);
        } else {
            handle_ap_frame(c, f);
        }
    }

    void handle_ap_frame(const ConnPtr& c, const protocol::Frame& f) {
        if (const auto* h = std::get_if<protocol::Hello>(&f)) {
            if (h->proto_version != protocol::proto_version) {
                reject(c, "version", "expected proto_version 1", true);
                return;
            }
            erase_pending(c);
            if (h->role == protocol::Role::Operator) {
                if (has_operator() && operator_ != c) {
                    reject(c, "busy", "an operator is already connected", true);
                    return;
                }
                operator_ = c;
                note_rx();
                emit("operator_attached", {{"peer", c->peer()}, {"session", h->session}});
            } else if (h->role == protocol::Role::Console) {
                if (std::find(consoles_.begin(), consoles_.end(), c) == consoles_.end()) consoles_.push_back(c);
                emit("console_attached", {{"peer", c->peer()}});
            } else {
                reject(c, "role", "robots cannot attach to a robot", true);
                return;
            }
            send_to(c, protocol::Hello{protocol::Role::Robot, h->session, protocol::proto_version});
            return;
        }
        if (c != operator_) {
            const bool console = std::find(consoles_.begin(), consoles_.end(), c) != consoles_.end();
            if (std::holds_alternative<protocol::Cmd>(f) || std::holds_alternative<protocol::Heartbeat>(f)) {
                reject(c, console ? "readonly" : "nohello",
                       console ? "console connections are read-only" : "send hello first", false);
            }
            return;
        }
        handle_operator_frame(c, f);
    }

    void handle_upstream_frame(const ConnPtr& c, const protocol::Frame& f) {
        if (const auto* h = std::get_if<protocol::Hello>(&f)) {
            if (h->role == protocol::Role::Robot) return;  // relay echo of our registration
            if (h->proto_version != protocol::proto_version) {
                send_to(c, protocol::Error{"version", "expected proto_version 1"});
                return;
            }
            client_attached_ = true;
            if (h->role == protocol::Role::Operator) {
                note_rx();
                emit("operator_attached", {{"via", "relay"}, {"session", h->session}});
            }
            send_to(c, protocol::Hello{protocol::Role::Robot, cfg_.session, protocol::proto_version});
            return;
        }
        if (const auto* e = std::get_if<protocol::Error>(&f)) {
            emit("relay_error", {{"code", e->code}, {"detail", e->detail}});
            return;
        }
        handle_operator_frame(c, f);
    }

    void handle_operator_frame(const ConnPtr& c, const protocol::Frame& f) {
        if (const auto* cmd = std::get_if<protocol::Cmd>(&f)) {
            note_rx();
            apply(*cmd);
        } else if (const auto* hb = std::get_if<protocol::Heartbeat>(&f)) {
            note_rx();
            send_to(c, protocol::Ack{hb->seq, clock_.now_ms()});
        }
    }

    void note_rx() {
        last_rx_us_ = clock_.now_us();
        failsafe_tripped_ = false;
    }

    void apply(const protocol::Cmd& cmd) {
        AppliedCommand rec;
        rec.at_us = clock_.now_us();
        rec.cmd = cmd;
        const auto i = probe::index(cmd.axis);
        if (cmd.on) {
            if (last_on_dir_[i] != 0 && last_on_dir_[i] != cmd.dir) {
                rec.reversal = true;
                if (probe::is_steering(cmd.axis)) {
                    const bool lr = cmd.axis == probe::AxisId::SteerLR;
                    const auto& env = cal_.envelope(lr);
                    const auto pos = state_.axis(cmd.axis).position_steps;
                    rec.reversal_in_zone = env.has_gap(static_cast<double>(pos));
                    rec.inside_deadband = probe::inside_deadband(env, lr ? state_.lr : state_.ud, pos);
                }
            }
            last_on_dir_[i] = cmd.dir;
        }
        state_ = probe::apply_axis_command(state_, cmd.axis, cmd.dir, cmd.on);
        applied_.push_back(rec);
    }

    void erase_pending(const ConnPtr& c) { std::erase(pending_, c); }

    void handle_close(const ConnPtr& c) {
        erase_pending(c);
        std::erase(consoles_, c);
        if (c == operator_) {
            operator_.reset();
            failsafe("operator_disconnected");
        }
    }

    Clock& clock_;
    const probe::Calibration& cal_;
    RobotConfig cfg_;
    EventLog* log_;
    probe::ProbeState state_;
    probe::ImuEmulator imu_;

    bool running_ = false;
    TimerId tick_timer_ = 0;
    Micros next_tick_us_ = 0;
    std::int64_t tick_count_ = 0;
    std::int64_t telemetry_every_ = 8;

    ConnPtr operator_;
    ConnPtr upstream_;
    bool client_attached_ = false;
    std::vector<ConnPtr> consoles_;
    std::vector<ConnPtr> pending_;

    Micros last_rx_us_ = 0;
    bool failsafe_tripped_ = false;
    std::uint64_t failsafe_count_ = 0;

    std::array<int, 4> last_on_dir_{};
    std::vector<AppliedCommand> applied_;
    TickObserver tick_observer_;
};

} // namespace teleprobe::net
