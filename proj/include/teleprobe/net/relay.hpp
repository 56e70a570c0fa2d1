#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/connection.hpp"
#include "teleprobe/net/event_log.hpp"
#include "teleprobe/net/impairment.hpp"
#include "teleprobe/net/link_stats.hpp"
#include "teleprobe/protocol/codec.hpp"

namespace teleprobe::net {

/// Cloud relay pairing one robot with its operator and read-only consoles by
/// session name. Each direction of each session has its own impairment queue.
class RelayNode {
public:
    RelayNode(Clock& clock, ImpairmentModel up, ImpairmentModel down, EventLog* log = nullptr)
        : clock_(clock), up_model_(up), down_model_(down), log_(log) {
        up_model_.validate();
        down_model_.validate();
    }

    RelayNode(const RelayNode&) = delete;
    RelayNode& operator=(const RelayNode&) = delete;

    void accept(const ConnPtr& conn) {
        conns_.push_back(conn);
        std::weak_ptr<Connection> wc = conn;
        conn->on_line([this, wc](std::string_view line) {
            if (auto c = wc.lock()) handle_line(c, line);
        });
        conn->on_close([this, wc] {
            if (auto c = wc.lock()) handle_close(c);
        });
    }

    /// Stats for `session`, or an empty record if it never existed.
    LinkStats stats(const std::string& session) const {
        auto it = sessions_.find(session);
        if (it == sessions_.end()) return {};
        const auto& s = *it->second;
        LinkStats out = s.stats;
        out.frames_forwarded = s.up.forwarded() + s.down.forwarded();
        out.frames_dropped = s.up.dropped() + s.down.dropped();
        return out;
    }

    bool has_session(const std::string& session) const {
        auto it = sessions_.find(session);
        return it != sessions_.end() && it->second->robot;
    }

private:
    struct Session {
        Session(ImpairmentModel up_m, ImpairmentModel down_m) : up(up_m), down(down_m) {}
        ConnPtr robot;
        ConnPtr op;
        std::vector<ConnPtr> consoles;
        ImpairedDirection up;    // operator/console -> robot
        ImpairedDirection down;  // robot -> operator/consoles
        LinkStats stats;
        std::map<std::int64_t, Micros> hb_in_flight;
    };

    enum class Kind { Robot, Operator, Console };
    struct Peer {
        std::string session;
        Kind kind;
    };

    void emit(std::string_view ev, nlohmann::json fields = nlohmann::json::object()) {
        if (log_) log_->emit(clock_.now_ms(), ev, std::move(fields));
    }

    static void send_to(const ConnPtr& c, const protocol::Frame& f) {
        if (c && c->is_open()) c->send(protocol::encode(f));
    }

    void reject(const ConnPtr& c, std::string code, std::string detail, bool close) {
        emit("reject", {{"peer", c->peer()}, {"code", code}, {"detail", detail}});
        send_to(c, protocol::Error{std::move(code), std::move(detail)});
        if (close) c->close();
    }

    void forward(const std::vector<ConnPtr>& to, ImpairedDirection& dir, std::string line) {
        if (to.empty()) return;
        const auto at = dir.schedule(clock_.now_us(), is_telemetry_line(line));
        if (!at) return;
        std::vector<std::weak_ptr<Connection>> targets(to.begin(), to.end());
        clock_.call_at(*at, [targets = std::move(targets), l = std::move(line)] {
            for (const auto& w : targets) {
                if (auto c = w.lock(); c && c->is_open()) c->send(l);
            }
        });
    }

    void forward_up(Session& s, std::string_view line) {
        if (!s.robot) return;
        std::string l(line);
        l.push_back('\n');
        forward({s.robot}, s.up, std::move(l));
    }

    void forward_down(Session& s, std::string_view line, bool operator_only) {
        std::vector<ConnPtr> to;
        if (s.op && s.op->is_open()) to.push_back(s.op);
        if (!operator_only) {
            for (const auto& c : s.consoles) {
                if (c->is_open()) to.push_back(c);
            }
        }
        std::string l(line);
        l.push_back('\n');
        forward(to, s.down, std::move(l));
    }

    void handle_line(const ConnPtr& c, std::string_view line) {
        protocol::Frame f;
        try {
            f = protocol::decode(line);
        } catch (const protocol::decode_error& e) {
            reject(c, std::string(protocol::errc_code(e.code())), e.what(), false);
            return;
        }
        auto pit = peers_.find(c.get());
        if (pit == peers_.end()) {
            const auto* h = std::get_if<protocol::Hello>(&f);
            if (!h) {
                reject(c, "nohello", "send hello first", false);
                return;
            }
            handle_hello(c, *h, line);
            return;
        }
        auto sit = sessions_.find(pit->second.session);
        if (sit == sessions_.end()) {
            reject(c, "nosession", "session '" + pit->second.session + "' is gone", true);
            return;
        }
        Session& s = *sit->second;
        switch (pit->second.kind) {
        case Kind::Robot:
            if (const auto* ack = std::get_if<protocol::Ack>(&f)) {
                if (auto h = s.hb_in_flight.find(ack->ack_seq); h != s.hb_in_flight.end()) {
                    s.stats.rtt_ms.push_back(static_cast<double>(clock_.now_us() - h->second) / 1000.0);
                    s.hb_in_flight.erase(h);
                }
            }
            // Acks and errors belong to the operator; telemetry and hellos go to everyone.
            forward_down(s, line,
                         std::holds_alternative<protocol::Ack>(f) || std::holds_alternative<protocol::Error>(f));
            break;
        case Kind::Operator:
            if (const auto* hb = std::get_if<protocol::Heartbeat>(&f)) {
                s.hb_in_flight[hb->seq] = clock_.now_us();
            }
            forward_up(s, line);
            break;
        case Kind::Console:
            if (std::holds_alternative<protocol::Cmd>(f) || std::holds_alternative<protocol::Heartbeat>(f)) {
                reject(c, "readonly", "console connections are read-only", false);
            }
            break;
        }
    }

    void handle_hello(const ConnPtr& c, const protocol::Hello& h, std::string_view line) {
        if (h.proto_version != protocol::proto_version) {
            reject(c, "version", "expected proto_version 1", true);
            return;
        }
        auto sit = sessions_.find(h.session);
        if (h.role == protocol::Role::Robot) {
            if (sit != sessions_.end() && sit->second->robot && sit->second->robot->is_open()) {
                reject(c, "busy", "a robot already serves session '" + h.session + "'", true);
                return;
            }
            if (sit == sessions_.end()) {
                sit = sessions_.emplace(h.session, std::make_unique<Session>(up_model_, down_model_)).first;
            }
            sit->second->robot = c;
            peers_[c.get()] = {h.session, Kind::Robot};
            emit("robot_registered", {{"session", h.session}, {"peer", c->peer()}});
            return;
        }
        if (sit == sessions_.end() || !sit->second->robot) {
            reject(c, "nosession", "no robot serves session '" + h.session + "'", true);
            return;
        }
        Session& s = *sit->second;
        if (h.role == protocol::Role::Operator) {
            if (s.op && s.op->is_open()) {
                reject(c, "busy", "session '" + h.session + "' already has an operator", true);
                return;
            }
            s.op = c;
            peers_[c.get()] = {h.session, Kind::Operator};
            emit("operator_joined", {{"session", h.session}, {"peer", c->peer()}});
        } else {
            s.consoles.push_back(c);
            peers_[c.get()] = {h.session, Kind::Console};
            emit("console_joined", {{"session", h.session}, {"peer", c->peer()}});
        }
        forward_up(s, line);
    }

    void handle_close(const ConnPtr& c) {
        std::erase(conns_, c);
        auto pit = peers_.find(c.get());
        if (pit == peers_.end()) return;
        const Peer p = pit->second;
        peers_.erase(pit);
        auto sit = sessions_.find(p.session);
        if (sit == sessions_.end()) return;
        Session& s = *sit->second;
        switch (p.kind) {
        case Kind::Robot:
            if (s.robot == c) {
                s.robot.reset();
                emit("robot_left", {{"session", p.session}});
                for (const auto& client : s.consoles) send_to(client, protocol::Error{"nosession", "robot left"});
                send_to(s.op, protocol::Error{"nosession", "robot left"});
            }
            break;
        case Kind::Operator:
            if (s.op == c) {
                s.op.reset();
                emit("operator_left", {{"session", p.session}});
            }
            break;
        case Kind::Console:
            std::erase(s.consoles, c);
            break;
        }
    }

    Clock& clock_;
    std::vector<ConnPtr> conns_;  // owns accepted connections until they close
    ImpairmentModel up_model_;
    ImpairmentModel down_model_;
    EventLog* log_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::map<const Connection*, Peer> peers_;
};

} // namespace teleprobe::net
