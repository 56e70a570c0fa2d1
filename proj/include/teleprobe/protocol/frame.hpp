#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "teleprobe/probe/axis.hpp"

namespace teleprobe::protocol {

inline constexpr int proto_version = 1;

enum class Role : std::uint8_t { Operator, Robot, Console };

struct Hello {
    Role role = Role::Operator;
    std::string session;
    int proto_version = protocol::proto_version;
    friend bool operator==(const Hello&, const Hello&) = default;
};

struct Cmd {
    probe::AxisId axis = probe::AxisId::SteerLR;
    int dir = 1;
    bool on = false;
    std::int64_t seq = 0;
    std::int64_t ts_ms = 0;
    friend bool operator==(const Cmd&, const Cmd&) = default;
};

struct Imu {
    double roll_deg = 0.0;
    double pitch_deg = 0.0;
    double yaw_deg = 0.0;
    std::int64_t seq = 0;
    std::int64_t ts_ms = 0;
    friend bool operator==(const Imu&, const Imu&) = default;
};

struct Heartbeat {
    std::int64_t seq = 0;
    std::int64_t ts_ms = 0;
    friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct Ack {
    std::int64_t ack_seq = 0;
    std::int64_t ts_ms = 0;
    friend bool operator==(const Ack&, const Ack&) = default;
};

struct Error {
    std::string code;
    std::string detail;
    friend bool operator==(const Error&, const Error&) = default;
};

using Frame = std::variant<Hello, Cmd, Imu, Heartbeat, Ack, Error>;

constexpr std::string_view role_name(Role r) noexcept {
    switch (r) {
    case Role::Operator: return "operator";
    case Role::Robot: return "robot";
    case Role::Console: return "console";
    }
    return "?";
}

} // namespace teleprobe::protocol
