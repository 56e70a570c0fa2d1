#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace teleprobe::net {

/// Structured JSON-lines event log. Events are always kept in memory; if a
/// stream is attached they are also written there as they happen.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(std::ostream* sink) : sink_(sink) {}

    void set_sink(std::ostream* sink) { sink_ = sink; }
    void set_keep(bool keep) { keep_ = keep; }

    void emit(std::int64_t ts_ms, std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
        nlohmann::ordered_json line;
        line["ts_ms"] = ts_ms;
        line["event"] = event;
        for (auto it = fields.begin(); it != fields.end(); ++it) {
            line[it.key()] = it.value();
        }
        std::lock_guard lock(mu_);
        if (keep_) {
            events_.push_back(line);
        }
        if (sink_) {
            *sink_ << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
            sink_->flush();
        }
    }

    std::vector<nlohmann::ordered_json> events() const {
        std::lock_guard lock(mu_);
        return events_;
    }

    std::size_t count(std::string_view event) const {
        std::lock_guard lock(mu_);
        std::size_t n = 0;
        for (const auto& e : events_) {
            if (e["event"] == event) ++n;
        }
        return n;
    }

private:
    mutable std::mutex mu_;
    std::ostream* sink_ = nullptr;
    bool keep_ = true;
    std::vector<nlohmann::ordered_json> events_;
};

} // namespace teleprobe::net
