#pragma once

#include <cstdint>
#include <initializer_list>

namespace teleprobe::harness {

/// splitmix64 step, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = mix_seed(base);
    for (auto p : parts) s = mix_seed(s ^ p);
    return s;
}

} // namespace teleprobe::harness
