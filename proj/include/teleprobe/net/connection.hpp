#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/impairment.hpp"

namespace teleprobe::net {

/// A bidirectional, ordered line transport (TCP socket, WebSocket, or an
/// in-process virtual pipe). Lines passed to send() carry their "\n".
class Connection {
public:
    using LineFn = std::function<void(std::string_view)>;
    using CloseFn = std::function<void()>;

    Connection() : id_(next_id()) {}
    virtual ~Connection() = default;
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    virtual void send(std::string line) = 0;
    virtual void close() = 0;
    virtual bool is_open() const = 0;
    virtual std::string peer() const { return "conn#" + std::to_string(id_); }

    std::uint64_t id() const noexcept { return id_; }

    void on_line(LineFn fn) { on_line_ = std::move(fn); }
    void on_close(CloseFn fn) { on_close_ = std::move(fn); }

protected:
    void deliver_line(std::string_view line) {
        if (on_line_) on_line_(line);
    }
    void deliver_close() {
        auto fn = std::move(on_close_);
        on_line_ = nullptr;
        on_close_ = nullptr;
        if (fn) fn();
    }

private:
    static std::uint64_t next_id() {
        static std::uint64_t n = 0;
        return ++n;
    }

    LineFn on_line_;
    CloseFn on_close_;
    std::uint64_t id_;
};

using ConnPtr = std::shared_ptr<Connection>;

/// One end of an in-process pipe driven by a Clock. Each direction carries
/// its own impairment; closing is delivered after frames already in flight.
class VirtualEnd final : public Connection, public std::enable_shared_from_this<VirtualEnd> {
public:
    VirtualEnd(Clock& clock, ImpairmentModel outgoing, std::string name)
        : clock_(clock), out_(outgoing), name_(std::move(name)) {}

    void send(std::string line) override {
        if (!open_) return;
        auto peer = peer_.lock();
        if (!peer) return;
        const bool telemetry = is_telemetry_line(line);
        auto at = out_.schedule(clock_.now_us(), telemetry);
        if (!at) return;
        std::weak_ptr<VirtualEnd> wp = peer;
        clock_.call_at(*at, [wp, l = std::move(line)] {
            if (auto p = wp.lock(); p && p->open_) {
                std::string_view v = l;
                if (!v.empty() && v.back() == '\n') v.remove_suffix(1);
                p->deliver_line(v);
            }
        });
    }

    void close() override {
        if (!open_) return;
        open_ = false;
        auto self = shared_from_this();
        if (auto peer = peer_.lock()) {
            std::weak_ptr<VirtualEnd> wp = peer;
            const Micros at = std::max(clock_.now_us(), out_.last_dispatch());
            clock_.call_at(at, [wp] {
                if (auto p = wp.lock(); p && p->open_) {
                    p->open_ = false;
                    p->deliver_close();
                }
            });
        }
        clock_.call_at(clock_.now_us(), [self] { self->deliver_close(); });
    }

    bool is_open() const override { return open_; }
    std::string peer() const override { return name_; }

    const ImpairedDirection& outgoing() const noexcept { return out_; }

    static std::pair<std::shared_ptr<VirtualEnd>, std::shared_ptr<VirtualEnd>>
    make_pair(Clock& clock, ImpairmentModel a_to_b = {}, ImpairmentModel b_to_a = {}, std::string a_name = "a",
              std::string b_name = "b") {
        auto a = std::make_shared<VirtualEnd>(clock, a_to_b, std::move(a_name));
        auto b = std::make_shared<VirtualEnd>(clock, b_to_a, std::move(b_name));
        a->peer_ = b;
        b->peer_ = a;
        return {a, b};
    }

private:
    Clock& clock_;
    ImpairedDirection out_;
    std::string name_;
    std::weak_ptr<VirtualEnd> peer_;
    bool open_ = true;
};

} // namespace teleprobe::net
