#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace teleprobe::probe {

enum class AxisId : std::uint8_t { Translation = 0, Rotation = 1, SteerLR = 2, SteerUD = 3 };

inline constexpr std::array<AxisId, 4> all_axes{AxisId::Translation, AxisId::Rotation, AxisId::SteerLR,
                                                AxisId::SteerUD};

constexpr std::size_t index(AxisId a) noexcept { return static_cast<std::size_t>(a); }

constexpr bool is_steering(AxisId a) noexcept { return a == AxisId::SteerLR || a == AxisId::SteerUD; }

/// Wire code used by the protocol ("TR", "RO", "LR", "UD").
constexpr std::string_view wire_code(AxisId a) noexcept {
    switch (a) {
    case AxisId::Translation: return "TR";
    case AxisId::Rotation: return "RO";
    case AxisId::SteerLR: return "LR";
    case AxisId::SteerUD: return "UD";
    }
    return "??";
}

constexpr std::optional<AxisId> axis_from_wire(std::string_view code) noexcept {
    for (AxisId a : all_axes) {
        if (wire_code(a) == code) {
            return a;
        }
    }
    return std::nullopt;
}

/// One stepper axis driven at a constant rate while engaged.
///
/// Sub-step progress is carried in an integer remainder (units of 1e-6 step),
/// so splitting an advance into pieces never changes the result.
struct MotorAxis {
    std::int64_t position_steps = 0;
    std::int64_t min_steps = 0;
    std::int64_t max_steps = 0;
    double rate_steps_per_s = 400.0;
    int engaged_dir = 0;
    std::int64_t remainder_microsteps = 0;

    friend bool operator==(const MotorAxis&, const MotorAxis&) = default;

    void engage(int dir, bool on) noexcept {
        const int next = on ? (dir > 0 ? 1 : -1) : 0;
        if (next != engaged_dir) {
            remainder_microsteps = 0;
        }
        engaged_dir = next;
    }

    /// Steps `dt_ms` of constant-rate motion, clamped to the bounds.
    void advance(std::int64_t dt_ms) noexcept {
        if (engaged_dir == 0 || dt_ms <= 0) {
            return;
        }
        // milli-steps/s * ms = 1e-6 steps
        const auto rate_milli = static_cast<std::int64_t>(rate_steps_per_s * 1000.0 + 0.5);
        remainder_microsteps += rate_milli * dt_ms;
        const std::int64_t whole = remainder_microsteps / 1'000'000;
        remainder_microsteps -= whole * 1'000'000;
        std::int64_t next = position_steps + engaged_dir * whole;
        if (next >= max_steps) {
            next = max_steps;
            if (engaged_dir > 0) remainder_microsteps = 0;
        }
        if (next <= min_steps) {
            next = min_steps;
            if (engaged_dir < 0) remainder_microsteps = 0;
        }
        position_steps = next;
    }
};

} // namespace teleprobe::probe
