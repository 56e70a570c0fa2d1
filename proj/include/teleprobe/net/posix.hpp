#pragma once

// Wall-clock transport: a poll(2) event loop implementing Clock, NDJSON over
// TCP, and a small WebSocket server (text frames, one protocol frame per
// message) that also serves static files on the same port.

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "teleprobe/error.hpp"
#include "teleprobe/net/clock.hpp"
#include "teleprobe/net/connection.hpp"
#include "teleprobe/protocol/line_buffer.hpp"

namespace teleprobe::net {

namespace detail {
inline std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}
inline void on_signal(int) { interrupt_flag().store(true); }

inline std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

inline void set_nonblocking(int fd) {
    const int fl = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, fl | O_NONBLOCK);
}
} // namespace detail

/// SIGINT/SIGTERM stop every PollLoop at its next wakeup; SIGPIPE is ignored.
inline void install_signal_handlers() {
    ::signal(SIGPIPE, SIG_IGN);
    struct sigaction sa {};
    sa.sa_handler = detail::on_signal;
    ::sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);
}

inline bool interrupted() { return detail::interrupt_flag().load(); }

/// Single-threaded event loop on the monotonic clock. Timers and file
/// descriptors are dispatched from run_*() only.
class PollLoop final : public DrivableClock {
public:
    using FdFn = std::function<void(short revents)>;

    PollLoop() : origin_(std::chrono::steady_clock::now()) { ::signal(SIGPIPE, SIG_IGN); }

    Micros now_us() const override {
        return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - origin_)
            .count();
    }

    TimerId call_at(Micros when, std::function<void()> fn) override {
        const TimerId id = ++next_id_;
        timers_.push(Timer{when, id, std::move(fn)});
        return id;
    }

    void cancel(TimerId id) override { cancelled_.insert(id); }

    void watch(int fd, short events, FdFn fn) { fds_[fd] = Watch{events, std::move(fn)}; }
    void modify(int fd, short events) {
        if (auto it = fds_.find(fd); it != fds_.end()) it->second.events = events;
    }
    void unwatch(int fd) { fds_.erase(fd); }
    std::size_t watched() const noexcept { return fds_.size(); }

    void stop() noexcept { stopped_ = true; }
    bool stopped() const noexcept { return stopped_ || interrupted(); }

    /// Waits at most `max_wait_us` for I/O, then runs due timers.
    void run_once(Micros max_wait_us) {
        run_due();
        Micros wait = max_wait_us;
        if (!timers_.empty()) wait = std::min(wait, std::max<Micros>(0, timers_.top().when - now_us()));
        wait = std::min<Micros>(wait, 100'000);  // bounded so signals are noticed

        std::vector<pollfd> pfds;
        pfds.reserve(fds_.size());
        for (const auto& [fd, w] : fds_) pfds.push_back({fd, w.events, 0});
        const int timeout_ms = static_cast<int>((wait + 999) / 1000);
        const int n = ::poll(pfds.data(), pfds.size(), timeout_ms);
        if (n > 0) {
            for (const auto& p : pfds) {
                if (p.revents == 0) continue;
                auto it = fds_.find(p.fd);
                if (it == fds_.end()) continue;  // unwatched by an earlier handler
                auto fn = it->second.fn;
                fn(p.revents);
            }
        }
        run_due();
    }

    void run() {
        while (!stopped()) run_once(1'000'000);
    }

    bool run_while_not(const std::function<bool()>& done, Micros limit) override {
        while (!done() && !stopped()) {
            const Micros now = now_us();
            if (now > limit) break;
            run_once(limit - now);
        }
        return done();
    }

    void run_for(Micros dt) override {
        const Micros end = now_us() + dt;
        run_while_not([] { return false; }, end);
    }

private:
    struct Timer {
        Micros when;
        TimerId id;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Timer& a, const Timer& b) const noexcept {
            return a.when != b.when ? a.when > b.when : a.id > b.id;
        }
    };
    struct Watch {
        short events;
        FdFn fn;
    };

    void run_due() {
        while (!timers_.empty() && timers_.top().when <= now_us()) {
            Timer t = std::move(const_cast<Timer&>(timers_.top()));
            timers_.pop();
            if (cancelled_.erase(t.id) != 0) continue;
            t.fn();
        }
    }

    std::chrono::steady_clock::time_point origin_;
    TimerId next_id_ = 0;
    bool stopped_ = false;
    std::priority_queue<Timer, std::vector<Timer>, Later> timers_;
    std::unordered_set<TimerId> cancelled_;
    std::map<int, Watch> fds_;
};

/// A non-blocking stream socket registered with a PollLoop. The loop's
/// handler holds a strong reference, so an open socket keeps itself alive.
class SocketConnection : public Connection, public std::enable_shared_from_this<SocketConnection> {
public:
    SocketConnection(PollLoop& loop, int fd, std::string peer) : loop_(loop), fd_(fd), peer_(std::move(peer)) {
        detail::set_nonblocking(fd_);
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~SocketConnection() override {
        if (fd_ >= 0) ::close(fd_);
    }

    /// Registers with the loop; call once after construction.
    void start() {
        auto self = shared_from_this();
        loop_.watch(fd_, POLLIN, [self](short ev) { self->on_ready(ev); });
    }

    void close() override {
        if (!open_) return;
        open_ = false;
        flush();
        teardown();
    }

    bool is_open() const override { return open_; }
    std::string peer() const override { return peer_; }

protected:
    /// Raw bytes arrived.
    virtual void on_bytes(std::string_view bytes) = 0;

    void write_raw(std::string_view bytes) {
        if (!open_ && !closing_flush_) return;
        out_.append(bytes);
        flush();
    }

    /// Sends what is queued and then closes (used after one-shot HTTP replies).
    void close_after_flush() {
        if (!open_) return;
        open_ = false;
        closing_flush_ = true;
        flush();
        if (out_.empty()) teardown();
    }

    PollLoop& loop_;

private:
    void on_ready(short ev) {
        if (ev & POLLOUT) {
            flush();
            if (closing_flush_ && out_.empty()) {
                teardown();
                return;
            }
        }
        if (ev & (POLLIN | POLLHUP | POLLERR)) {
            char buf[16384];
            for (;;) {
                const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
                if (n > 0) {
                    if (open_) on_bytes(std::string_view(buf, static_cast<std::size_t>(n)));
                    if (fd_ < 0) return;
                    continue;
                }
                if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
                if (n < 0 && errno == EINTR) continue;
                // EOF or hard error.
                open_ = false;
                closing_flush_ = false;
                teardown();
                return;
            }
        }
    }

    void flush() {
        if (fd_ < 0) return;
        while (!out_.empty()) {
            const ssize_t n = ::send(fd_, out_.data(), out_.size(), MSG_NOSIGNAL);
            if (n > 0) {
                out_.erase(0, static_cast<std::size_t>(n));
                continue;
            }
            if (n < 0 && errno == EINTR) continue;
            if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
            out_.clear();
            open_ = false;
            break;
        }
        if (fd_ >= 0) loop_.modify(fd_, static_cast<short>(out_.empty() ? POLLIN : (POLLIN | POLLOUT)));
    }

    void teardown() {
        if (fd_ < 0) return;
        const int fd = fd_;
        fd_ = -1;
        ::close(fd);
        auto self = shared_from_this();
        // Deliver the close from the loop, not from inside a caller's send().
        loop_.call_at(loop_.now_us(), [self] { self->deliver_close(); });
        loop_.unwatch(fd);  // drops the loop's reference; `self` above keeps us alive
    }

    int fd_;
    std::string peer_;
    std::string out_;
    bool open_ = true;
    bool closing_flush_ = false;
};

/// NDJSON over TCP.
class TcpConnection final : public SocketConnection {
public:
    using SocketConnection::SocketConnection;

    static std::shared_ptr<TcpConnection> make(PollLoop& loop, int fd, std::string peer) {
        auto c = std::make_shared<TcpConnection>(loop, fd, std::move(peer));
        c->start();
        return c;
    }

    void send(std::string line) override {
        if (!is_open()) return;
        write_raw(line);
    }

private:
    void on_bytes(std::string_view bytes) override {
        lines_.feed(bytes);
        while (auto l = lines_.next()) {
            if (!is_open()) return;
            deliver_line(*l);
        }
    }

    protocol::LineBuffer lines_;
};

// ---- WebSocket -------------------------------------------------------------

inline std::string base64(const unsigned char* data, std::size_t n) {
    std::string out(4 * ((n + 2) / 3) + 1, '\0');
    const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
    out.resize(static_cast<std::size_t>(len));
    return out;
}

/// Sec-WebSocket-Accept for a client key.
inline std::string ws_accept_key(const std::string& key) {
    const std::string s = key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(s.data()), s.size(), digest);
    return base64(digest, sizeof digest);
}

/// One frame. Clients must mask (`mask` non-null), servers must not.
inline std::string ws_encode_frame(std::uint8_t opcode, std::string_view payload, const std::uint8_t* mask = nullptr) {
    std::string f;
    f.push_back(static_cast<char>(0x80 | opcode));
    const std::uint8_t m = mask ? 0x80 : 0x00;
    const auto n = payload.size();
    if (n < 126) {
        f.push_back(static_cast<char>(m | n));
    } else if (n <= 0xFFFF) {
        f.push_back(static_cast<char>(m | 126));
        f.push_back(static_cast<char>(n >> 8));
        f.push_back(static_cast<char>(n & 0xFF));
    } else {
        f.push_back(static_cast<char>(m | 127));
        for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF));
    }
    if (mask) {
        f.append(reinterpret_cast<const char*>(mask), 4);
        for (std::size_t i = 0; i < n; ++i) f.push_back(static_cast<char>(payload[i] ^ mask[i % 4]));
    } else {
        f.append(payload);
    }
    return f;
}

struct WsFrame {
    bool fin = true;
    std::uint8_t opcode = 0;
    std::string payload;
};

/// Pops one complete frame off the front of `buf`, unmasking as needed.
/// nullopt if more bytes are needed; throws on a frame above `max_payload`.
inline std::optional<WsFrame> ws_decode_frame(std::string& buf, std::size_t max_payload = 1 << 20) {
    if (buf.size() < 2) return std::nullopt;
    const auto b0 = static_cast<std::uint8_t>(buf[0]);
    const auto b1 = static_cast<std::uint8_t>(buf[1]);
    std::size_t pos = 2;
    std::uint64_t len = b1 & 0x7F;
    if (len == 126) {
        if (buf.size() < 4) return std::nullopt;
        len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[2])) << 8) | static_cast<std::uint8_t>(buf[3]);
        pos = 4;
    } else if (len == 127) {
        if (buf.size() < 10) return std::nullopt;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<std::uint8_t>(buf[2 + static_cast<std::size_t>(i)]);
        pos = 10;
    }
    if (len > max_payload) throw std::length_error("websocket frame too large");
    const bool masked = (b1 & 0x80) != 0;
    const std::size_t need = pos + (masked ? 4 : 0) + static_cast<std::size_t>(len);
    if (buf.size() < need) return std::nullopt;
    WsFrame f;
    f.fin = (b0 & 0x80) != 0;
    f.opcode = b0 & 0x0F;
    const std::size_t data = pos + (masked ? 4 : 0);
    f.payload = buf.substr(data, static_cast<std::size_t>(len));
    if (masked) {
        for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ buf[pos + i % 4]);
    }
    buf.erase(0, need);
    return f;
}

/// Files under `root`; "/" maps to index.html. A small placeholder page is
/// served for "/" when the console has not been built.
class StaticFiles {
public:
    explicit StaticFiles(std::filesystem::path root = {}) : root_(std::move(root)) {}

    struct Reply {
        int status = 404;
        std::string content_type = "text/plain; charset=utf-8";
        std::string body = "not found\n";
    };

    Reply get(std::string path) const {
        if (auto q = path.find_first_of("?#"); q != std::string::npos) path.erase(q);
        if (path.empty() || path == "/") path = "/index.html";
        Reply r;
        if (path.find("..") != std::string::npos || path[0] != '/') return r;
        if (!root_.empty()) {
            const auto file = root_ / path.substr(1);
            std::ifstream in(file, std::ios::binary);
            if (in && std::filesystem::is_regular_file(file)) {
                std::ostringstream ss;
                ss << in.rdbuf();
                r.status = 200;
                r.body = ss.str();
                r.content_type = content_type(file.extension().string());
                return r;
            }
        }
        if (path == "/index.html") {
            r.status = 200;
            r.content_type = "text/html; charset=utf-8";
            r.body =
                "<!doctype html><meta charset=utf-8><title>teleprobe</title>"
                "<p>The web console is not installed. Connect a WebSocket client to this port; "
                "frames are NDJSON protocol lines, one per text message.</p>\n";
        }
        return r;
    }

    static std::string content_type(const std::string& ext) {
        static const std::map<std::string, std::string> types{
            {".html", "text/html; charset=utf-8"}, {".js", "text/javascript; charset=utf-8"},
            {".css", "text/css; charset=utf-8"},   {".json", "application/json"},
            {".svg", "image/svg+xml"},             {".png", "image/png"},
            {".ico", "image/x-icon"},              {".map", "application/json"}};
        auto it = types.find(ext);
        return it == types.end() ? "application/octet-stream" : it->second;
    }

private:
    std::filesystem::path root_;
};

/// Server side of one HTTP connection on the console port: either a
/// WebSocket upgrade (then NDJSON lines as text messages) or a static GET.
class WsConnection final : public SocketConnection {
public:
    using UpgradeFn = std::function<void(const std::shared_ptr<WsConnection>&)>;

    WsConnection(PollLoop& loop, int fd, std::string peer, const StaticFiles* files, UpgradeFn on_upgrade)
        : SocketConnection(loop, fd, std::move(peer)), files_(files), on_upgrade_(std::move(on_upgrade)) {}

    static std::shared_ptr<WsConnection> make(PollLoop& loop, int fd, std::string peer, const StaticFiles* files,
                                              UpgradeFn on_upgrade) {
        auto c = std::make_shared<WsConnection>(loop, fd, std::move(peer), files, std::move(on_upgrade));
        c->start();
        return c;
    }

    void send(std::string line) override {
        if (!is_open() || !upgraded_) return;
        if (!line.empty() && line.back() == '\n') line.pop_back();
        write_raw(ws_encode_frame(0x1, line));
    }

    bool upgraded() const noexcept { return upgraded_; }

private:
    void on_bytes(std::string_view bytes) override {
        buf_.append(bytes);
        if (!upgraded_) {
            const auto end = buf_.find("\r\n\r\n");
            if (end == std::string::npos) {
                if (buf_.size() > 16384) reply_http(431, "text/plain", "request header too large\n");
                return;
            }
            const std::string head = buf_.substr(0, end);
            buf_.erase(0, end + 4);
            handle_request(head);
            if (!upgraded_ || !is_open()) return;
        }
        try {
            while (auto f = ws_decode_frame(buf_)) {
                handle_frame(std::move(*f));
                if (!is_open()) return;
            }
        } catch (const std::length_error&) {
            write_raw(ws_encode_frame(0x8, std::string("\x03\xF1", 2)));  // 1009 message too big
            close();
        }
    }

    static std::string lower(std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }

    void handle_request(const std::string& head) {
        std::istringstream in(head);
        std::string method, target, version;
        in >> method >> target >> version;
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::string> headers;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string v = line.substr(colon + 1);
            v.erase(0, v.find_first_not_of(" \t"));
            headers[lower(line.substr(0, colon))] = v;
        }
        if (method != "GET") {
            reply_http(405, "text/plain", "method not allowed\n");
            return;
        }
        const bool wants_ws = lower(headers["upgrade"]) == "websocket" && headers.count("sec-websocket-key");
        if (!wants_ws) {
            const auto r = files_ ? files_->get(target) : StaticFiles::Reply{};
            reply_http(r.status, r.content_type, r.body);
            return;
        }
        if (!on_upgrade_) {
            reply_http(404, "text/plain", "no websocket endpoint here\n");
            return;
        }
        write_raw("HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                  "Sec-WebSocket-Accept: " +
                  ws_accept_key(headers["sec-websocket-key"]) + "\r\n\r\n");
        upgraded_ = true;
        on_upgrade_(std::static_pointer_cast<WsConnection>(shared_from_this()));
    }

    void reply_http(int status, const std::string& type, const std::string& body) {
        static const std::map<int, std::string> reasons{
            {200, "OK"}, {404, "Not Found"}, {405, "Method Not Allowed"}, {431, "Request Header Fields Too Large"}};
        auto it = reasons.find(status);
        std::ostringstream out;
        out << "HTTP/1.1 " << status << ' ' << (it == reasons.end() ? "Error" : it->second) << "\r\n"
            << "Content-Type: " << type << "\r\nContent-Length: " << body.size()
            << "\r\nConnection: close\r\n\r\n"
            << body;
        write_raw(out.str());
        close_after_flush();
    }

    void handle_frame(WsFrame f) {
        switch (f.opcode) {
        case 0x0:  // continuation
        case 0x1:
        case 0x2:
            message_ += f.payload;
            if (!f.fin) return;
            {
                protocol::LineBuffer lines;
                lines.feed(message_);
                lines.feed("\n");
                message_.clear();
                while (auto l = lines.next()) {
                    if (!l->empty()) deliver_line(*l);
                    if (!is_open()) return;
                }
            }
            return;
        case 0x8:
            write_raw(ws_encode_frame(0x8, f.payload.substr(0, 2)));
            close();
            return;
        case 0x9:
            write_raw(ws_encode_frame(0xA, f.payload));
            return;
        default:
            return;
        }
    }

    const StaticFiles* files_;
    UpgradeFn on_upgrade_;
    std::string buf_;
    std::string message_;
    bool upgraded_ = false;
};

// ---- sockets ---------------------------------------------------------------

inline std::string peer_name(const sockaddr_storage& ss) {
    char host[INET6_ADDRSTRLEN] = "?";
    int port = 0;
    if (ss.ss_family == AF_INET) {
        const auto* a = reinterpret_cast<const sockaddr_in*>(&ss);
        ::inet_ntop(AF_INET, &a->sin_addr, host, sizeof host);
        port = ntohs(a->sin_port);
    } else if (ss.ss_family == AF_INET6) {
        const auto* a = reinterpret_cast<const sockaddr_in6*>(&ss);
        ::inet_ntop(AF_INET6, &a->sin6_addr, host, sizeof host);
        port = ntohs(a->sin6_port);
    }
    return std::string(host) + ":" + std::to_string(port);
}

/// Listening TCP socket. Port 0 picks a free port (see port()).
class TcpListener {
public:
    using AcceptFn = std::function<void(int fd, std::string peer)>;

    TcpListener(PollLoop& loop, int port, AcceptFn fn, const std::string& host = "0.0.0.0")
        : loop_(loop), fn_(std::move(fn)) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw service_error(detail::errno_text("socket"));
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd_);
            throw service_error("bad listen address '" + host + "'");
        }
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
            const auto msg = detail::errno_text("bind " + host + ":" + std::to_string(port));
            ::close(fd_);
            throw service_error(msg);
        }
        if (::listen(fd_, 16) < 0) {
            const auto msg = detail::errno_text("listen");
            ::close(fd_);
            throw service_error(msg);
        }
        socklen_t len = sizeof addr;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        detail::set_nonblocking(fd_);
        loop_.watch(fd_, POLLIN, [this](short) { accept_all(); });
    }

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener() {
        loop_.unwatch(fd_);
        ::close(fd_);
    }

    int port() const noexcept { return port_; }

private:
    void accept_all() {
        for (;;) {
            sockaddr_storage ss{};
            socklen_t len = sizeof ss;
            const int fd = ::accept(fd_, reinterpret_cast<sockaddr*>(&ss), &len);
            if (fd < 0) return;
            fn_(fd, peer_name(ss));
        }
    }

    PollLoop& loop_;
    AcceptFn fn_;
    int fd_ = -1;
    int port_ = 0;
};

/// Connects with a timeout and returns the descriptor (non-blocking).
inline int tcp_dial(const std::string& host, int port, int timeout_ms = 2000) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw service_error("resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::string err = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        detail::set_nonblocking(fd);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            pollfd p{fd, POLLOUT, 0};
            rc = ::poll(&p, 1, timeout_ms);
            if (rc == 1) {
                int so = 0;
                socklen_t len = sizeof so;
                ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &so, &len);
                errno = so;
                rc = so == 0 ? 0 : -1;
            } else {
                errno = rc == 0 ? ETIMEDOUT : errno;
                rc = -1;
            }
        }
        if (rc == 0) {
            ::freeaddrinfo(res);
            return fd;
        }
        err = std::strerror(errno);
        ::close(fd);
    }
    ::freeaddrinfo(res);
    throw service_error("connect " + host + ":" + service + ": " + err);
}

inline std::shared_ptr<TcpConnection> tcp_connect(PollLoop& loop, const std::string& host, int port) {
    const int fd = tcp_dial(host, port);
    return TcpConnection::make(loop, fd, host + ":" + std::to_string(port));
}

/// "host:port" or ":port" or "host" (with `default_port`).
inline std::pair<std::string, int> parse_endpoint(const std::string& s, int default_port) {
    const auto colon = s.rfind(':');
    std::string host = colon == std::string::npos ? s : s.substr(0, colon);
    int port = default_port;
    if (colon != std::string::npos) {
        const auto p = s.substr(colon + 1);
        try {
            std::size_t used = 0;
            port = std::stoi(p, &used);
            if (used != p.size()) throw std::invalid_argument(p);
        } catch (const std::exception&) {
            throw config_error("bad port in endpoint '" + s + "'");
        }
    }
    if (port <= 0 || port > 65535) throw config_error("port out of range in '" + s + "'");
    if (host.empty()) host = "127.0.0.1";
    return {host, port};
}

} // namespace teleprobe::net
