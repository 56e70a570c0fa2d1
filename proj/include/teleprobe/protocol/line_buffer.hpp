#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace teleprobe::protocol {

/// Splits a byte stream into newline-terminated lines. A line longer than
/// `max_line` is discarded up to its terminating newline, so one bad line
/// never bleeds into the next.
class LineBuffer {
public:
    explicit LineBuffer(std::size_t max_line = 64 * 1024) : max_line_(max_line) {}

    void feed(std::string_view bytes) { buf_.append(bytes); }

    /// Next complete line without its "\n", or nullopt if none is buffered.
    std::optional<std::string> next() {
        for (;;) {
            const auto nl = buf_.find('\n', scan_from_);
            if (nl == std::string::npos) {
                if (buf_.size() > max_line_) {
                    discarding_ = true;
                    buf_.clear();
                }
                scan_from_ = buf_.size();
                return std::nullopt;
            }
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            scan_from_ = 0;
            if (discarding_) {
                discarding_ = false;
                ++overflows_;
                continue;
            }
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            return line;
        }
    }

    std::size_t overflow_count() const noexcept { return overflows_; }
    std::size_t buffered() const noexcept { return buf_.size(); }

private:
    std::string buf_;
    std::size_t scan_from_ = 0;
    std::size_t max_line_;
    bool discarding_ = false;
    std::size_t overflows_ = 0;
};

} // namespace teleprobe::protocol
