#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "teleprobe/net/posix.hpp"
#include "teleprobe/net/relay.hpp"
#include "teleprobe/net/robot.hpp"

namespace teleprobe::net {

/// Dial policy for a robot in STA mode.
struct RetryPolicy {
    std::int64_t backoff_ms = 1000;
    int max_attempts = 10;
};

struct ServiceOptions {
    std::string bind_host = "0.0.0.0";
    int port = 0;                      // TCP port; the console listens on port + 1
    std::filesystem::path assets;      // static files for the console port
    std::string relay_host;            // STA only
    int relay_port = default_relay_port;
    RetryPolicy retry;
};

/// Robot process: the RobotNode on a PollLoop with its listeners.
///
/// AP: NDJSON on `port`, WebSocket + static files on `port + 1`.
/// STA: dials the relay (and redials after losing it); the console port
/// serves static files only, since consoles attach through the relay.
class RobotService {
public:
    RobotService(PollLoop& loop, const probe::Calibration& cal, RobotConfig cfg, ServiceOptions opts,
                 EventLog* log = nullptr)
        : loop_(loop), opts_(std::move(opts)), log_(log), files_(opts_.assets), node_(loop, cal, cfg, log) {
        if (cfg.mode == Mode::AP) {
            tcp_ = std::make_unique<TcpListener>(
                loop_, opts_.port, [this](int fd, std::string peer) { node_.accept(TcpConnection::make(loop_, fd, peer)); },
                opts_.bind_host);
            ws_ = std::make_unique<TcpListener>(
                loop_, console_port_for(opts_.port),
                [this](int fd, std::string peer) {
                    WsConnection::make(loop_, fd, peer, &files_, [this](const auto& c) { node_.accept(c); });
                },
                opts_.bind_host);
        } else {
            if (opts_.relay_host.empty()) throw config_error("STA mode needs a relay address");
            ws_ = std::make_unique<TcpListener>(
                loop_, console_port_for(opts_.port),
                [this](int fd, std::string peer) { WsConnection::make(loop_, fd, peer, &files_, nullptr); },
                opts_.bind_host);
        }
        node_.start();
        if (cfg.mode == Mode::STA) dial();
    }

    RobotService(const RobotService&) = delete;
    RobotService& operator=(const RobotService&) = delete;
    ~RobotService() { loop_.cancel(retry_timer_); }

    RobotNode& node() noexcept { return node_; }
    int port() const noexcept { return tcp_ ? tcp_->port() : 0; }
    int console_port() const noexcept { return ws_ ? ws_->port() : 0; }
    /// Set once the dial policy is exhausted; the loop has been stopped.
    bool failed() const noexcept { return failed_; }
    const std::string& failure() const noexcept { return failure_; }

private:
    // Port 0 means "any" for both listeners (tests).
    static int console_port_for(int requested) { return requested == 0 ? 0 : requested + 1; }

    void emit(std::string_view ev, nlohmann::json fields) {
        if (log_) log_->emit(loop_.now_ms(), ev, std::move(fields));
    }

    void dial() {
        ++attempts_;
        try {
            auto c = tcp_connect(loop_, opts_.relay_host, opts_.relay_port);
            attempts_ = 0;
            emit("relay_connected", {{"relay", c->peer()}});
            node_.attach_upstream(c);
            watch_upstream();
            return;
        } catch (const service_error& e) {
            emit("relay_dial_failed", {{"attempt", attempts_}, {"error", e.what()}});
            if (attempts_ >= opts_.retry.max_attempts) {
                failed_ = true;
                failure_ = e.what();
                loop_.stop();
                return;
            }
        }
        retry_timer_ = loop_.call_after(ms_to_us(static_cast<double>(opts_.retry.backoff_ms)), [this] { dial(); });
    }

    void watch_upstream() {
        retry_timer_ = loop_.call_after(ms_to_us(200.0), [this] {
            if (node_.upstream_connected()) {
                watch_upstream();
                return;
            }
            emit("relay_lost", nlohmann::json::object());
            retry_timer_ = loop_.call_after(ms_to_us(static_cast<double>(opts_.retry.backoff_ms)), [this] { dial(); });
        });
    }

    PollLoop& loop_;
    ServiceOptions opts_;
    EventLog* log_;
    StaticFiles files_;
    RobotNode node_;
    std::unique_ptr<TcpListener> tcp_;
    std::unique_ptr<TcpListener> ws_;
    TimerId retry_timer_ = 0;
    int attempts_ = 0;
    bool failed_ = false;
    std::string failure_;
};

/// Relay process: NDJSON on `port`, WebSocket + static files on `port + 1`.
class RelayService {
public:
    RelayService(PollLoop& loop, ImpairmentModel up, ImpairmentModel down, ServiceOptions opts,
                 EventLog* log = nullptr)
        : loop_(loop), files_(opts.assets), node_(loop, up, down, log) {
        tcp_ = std::make_unique<TcpListener>(
            loop_, opts.port, [this](int fd, std::string peer) { node_.accept(TcpConnection::make(loop_, fd, peer)); },
            opts.bind_host);
        ws_ = std::make_unique<TcpListener>(
            loop_, opts.port == 0 ? 0 : opts.port + 1,
            [this](int fd, std::string peer) {
                WsConnection::make(loop_, fd, peer, &files_, [this](const auto& c) { node_.accept(c); });
            },
            opts.bind_host);
    }

    RelayNode& node() noexcept { return node_; }
    int port() const noexcept { return tcp_->port(); }
    int console_port() const noexcept { return ws_->port(); }

private:
    PollLoop& loop_;
    StaticFiles files_;
    RelayNode node_;
    std::unique_ptr<TcpListener> tcp_;
    std::unique_ptr<TcpListener> ws_;
};

} // namespace teleprobe::net
