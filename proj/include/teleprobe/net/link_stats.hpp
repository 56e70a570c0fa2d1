#pragma once

#include <cstdint>
#include <vector>

namespace teleprobe::net {

struct LinkStats {
    std::uint64_t frames_forwarded = 0;
    std::uint64_t frames_dropped = 0;
    std::uint64_t rtt_lost = 0;
    std::vector<double> rtt_ms;
};

} // namespace teleprobe::net
