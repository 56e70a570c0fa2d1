#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/connection.hpp"
#include "teleprobe/net/link_stats.hpp"
#include "teleprobe/protocol/codec.hpp"

namespace teleprobe::op {

/// Operator side of a robot link (direct or relayed): hello, periodic
/// heartbeats with RTT bookkeeping, sequenced commands and the latest IMU frame.
class OperatorClient {
public:
    struct Options {
        std::string session = "default";
        protocol::Role role = protocol::Role::Operator;
        std::int64_t heartbeat_ms = 1000;
        std::int64_t rtt_timeout_ms = 3000;
    };

    using ImuFn = std::function<void(const protocol::Imu&)>;
    using ErrorFn = std::function<void(const protocol::Error&)>;
    using AckFn = std::function<void(const protocol::Ack&)>;

    OperatorClient(net::Clock& clock, net::ConnPtr conn, Options opts)
        : clock_(clock), conn_(std::move(conn)), opts_(std::move(opts)) {}
    OperatorClient(const OperatorClient&) = delete;
    OperatorClient& operator=(const OperatorClient&) = delete;
    ~OperatorClient() { stop(); }

    void start() {
        if (running_) return;
        running_ = true;
        conn_->on_line([this](std::string_view line) { handle_line(line); });
        conn_->on_close([this] { closed_ = true; });
        send(protocol::Hello{opts_.role, opts_.session, protocol::proto_version});
        if (opts_.heartbeat_ms > 0) schedule_heartbeat();
    }

    void stop() {
        if (!running_) return;
        running_ = false;
        clock_.cancel(hb_timer_);
    }

    /// Sends a command and returns its sequence number.
    std::int64_t send_cmd(probe::AxisId axis, int dir, bool on) {
        protocol::Cmd c{axis, dir, on, ++cmd_seq_, clock_.now_ms()};
        sent_.push_back(c);
        send(c);
        return c.seq;
    }

    std::int64_t send_heartbeat() {
        expire_rtt();
        const auto seq = ++hb_seq_;
        hb_in_flight_[seq] = clock_.now_us();
        send(protocol::Heartbeat{seq, clock_.now_ms()});
        return seq;
    }

    void on_imu(ImuFn fn) { imu_fn_ = std::move(fn); }
    void on_error(ErrorFn fn) { error_fn_ = std::move(fn); }
    void on_ack(AckFn fn) { ack_fn_ = std::move(fn); }

    bool connected() const { return !closed_ && conn_->is_open(); }
    bool acknowledged() const noexcept { return acknowledged_; }
    const std::optional<protocol::Imu>& latest_imu() const noexcept { return latest_imu_; }
    /// Local receive time of the latest IMU frame, or nullopt before the first.
    std::optional<net::Micros> last_imu_rx_us() const noexcept { return last_imu_rx_; }
    const std::vector<protocol::Cmd>& sent_commands() const noexcept { return sent_; }
    const std::vector<protocol::Error>& errors() const noexcept { return errors_; }
    const net::LinkStats& link_stats() {
        expire_rtt();
        return stats_;
    }

private:
    void send(const protocol::Frame& f) {
        if (connected()) conn_->send(protocol::encode(f));
    }

    void schedule_heartbeat() {
        hb_timer_ = clock_.call_after(net::ms_to_us(opts_.heartbeat_ms), [this] {
            if (!running_) return;
            send_heartbeat();
            schedule_heartbeat();
        });
    }

    void expire_rtt() {
        const auto cutoff = clock_.now_us() - net::ms_to_us(opts_.rtt_timeout_ms);
        for (auto it = hb_in_flight_.begin(); it != hb_in_flight_.end();) {
            if (it->second <= cutoff) {
                ++stats_.rtt_lost;
                it = hb_in_flight_.erase(it);
            } else {
                ++it;
            }
        }
    }

    void handle_line(std::string_view line) {
        protocol::Frame f;
        try {
            f = protocol::decode(line);
        } catch (const protocol::decode_error&) {
            ++stats_.frames_dropped;
            return;
        }
        ++stats_.frames_forwarded;
        if (const auto* imu = std::get_if<protocol::Imu>(&f)) {
            latest_imu_ = *imu;
            last_imu_rx_ = clock_.now_us();
            if (imu_fn_) imu_fn_(*imu);
        } else if (const auto* ack = std::get_if<protocol::Ack>(&f)) {
            if (auto it = hb_in_flight_.find(ack->ack_seq); it != hb_in_flight_.end()) {
                stats_.rtt_ms.push_back(static_cast<double>(clock_.now_us() - it->second) / 1000.0);
                hb_in_flight_.erase(it);
            }
            if (ack_fn_) ack_fn_(*ack);
        } else if (const auto* h = std::get_if<protocol::Hello>(&f)) {
            if (h->role == protocol::Role::Robot) acknowledged_ = true;
        } else if (const auto* e = std::get_if<protocol::Error>(&f)) {
            errors_.push_back(*e);
            if (error_fn_) error_fn_(*e);
        }
    }

    net::Clock& clock_;
    net::ConnPtr conn_;
    Options opts_;
    bool running_ = false;
    bool closed_ = false;
    bool acknowledged_ = false;
    net::TimerId hb_timer_ = 0;
    std::int64_t cmd_seq_ = 0;
    std::int64_t hb_seq_ = 0;
    std::map<std::int64_t, net::Micros> hb_in_flight_;
    std::optional<protocol::Imu> latest_imu_;
    std::optional<net::Micros> last_imu_rx_;
    std::vector<protocol::Cmd> sent_;
    std::vector<protocol::Error> errors_;
    net::LinkStats stats_;
    ImuFn imu_fn_;
    ErrorFn error_fn_;
    AckFn ack_fn_;
};

} // namespace teleprobe::op
