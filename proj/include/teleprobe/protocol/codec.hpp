#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "teleprobe/protocol/frame.hpp"

namespace teleprobe::protocol {

inline constexpr std::size_t max_frame_bytes = 1024;

class encode_error : public std::length_error {
public:
    using std::length_error::length_error;
};

enum class DecodeErrc { malformed, unknown_type, missing_field, bad_enum, bad_value };

/// Wire spelling of a decode failure, used as the `code` of the Error frame sent back.
constexpr std::string_view errc_code(DecodeErrc e) noexcept {
    switch (e) {
    case DecodeErrc::malformed: return "parse";
    case DecodeErrc::unknown_type: return "type";
    case DecodeErrc::missing_field: return "missing";
    case DecodeErrc::bad_enum: return "enum";
    case DecodeErrc::bad_value: return "value";
    }
    return "?";
}

class decode_error : public std::runtime_error {
public:
    decode_error(DecodeErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    DecodeErrc code() const noexcept { return code_; }

private:
    DecodeErrc code_;
};

namespace detail {

using ojson = nlohmann::ordered_json;

struct ToJson {
    ojson operator()(const Hello& f) const {
        return ojson{{"t", "hello"}, {"role", role_name(f.role)}, {"session", f.session},
                     {"proto_version", f.proto_version}};
    }
    ojson operator()(const Cmd& f) const {
        return ojson{{"t", "cmd"},   {"axis", probe::wire_code(f.axis)}, {"dir", f.dir}, {"on", f.on},
                     {"seq", f.seq}, {"ts_ms", f.ts_ms}};
    }
    ojson operator()(const Imu& f) const {
        return ojson{{"t", "imu"},   {"roll_deg", f.roll_deg}, {"pitch_deg", f.pitch_deg}, {"yaw_deg", f.yaw_deg},
                     {"seq", f.seq}, {"ts_ms", f.ts_ms}};
    }
    ojson operator()(const Heartbeat& f) const { return ojson{{"t", "hb"}, {"seq", f.seq}, {"ts_ms", f.ts_ms}}; }
    ojson operator()(const Ack& f) const { return ojson{{"t", "ack"}, {"ack_seq", f.ack_seq}, {"ts_ms", f.ts_ms}}; }
    ojson operator()(const Error& f) const { return ojson{{"t", "err"}, {"code", f.code}, {"detail", f.detail}}; }
};

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw decode_error(DecodeErrc::missing_field, std::string("missing field '") + key + "'");
    }
    return *it;
}

inline std::int64_t get_int(const nlohmann::json& obj, const char* key) {
    const auto& v = field(obj, key);
    if (!v.is_number_integer()) {
        throw decode_error(DecodeErrc::bad_value, std::string("field '") + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

inline double get_real(const nlohmann::json& obj, const char* key) {
    const auto& v = field(obj, key);
    if (!v.is_number()) {
        throw decode_error(DecodeErrc::bad_value, std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

inline std::string get_string(const nlohmann::json& obj, const char* key) {
    const auto& v = field(obj, key);
    if (!v.is_string()) {
        throw decode_error(DecodeErrc::bad_value, std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline bool get_bool(const nlohmann::json& obj, const char* key) {
    const auto& v = field(obj, key);
    if (!v.is_boolean()) {
        throw decode_error(DecodeErrc::bad_value, std::string("field '") + key + "' must be a boolean");
    }
    return v.get<bool>();
}

} // namespace detail

/// One NDJSON line, newline included. Throws encode_error past 1024 bytes.
inline std::string encode(const Frame& frame) {
    std::string line = std::visit(detail::ToJson{}, frame).dump();
    line.push_back('\n');
    if (line.size() > max_frame_bytes) {
        throw encode_error("frame of " + std::to_string(line.size()) + " bytes exceeds " +
                           std::to_string(max_frame_bytes));
    }
    return line;
}

/// Parses one line (trailing "\n" / "\r\n" optional). Unknown fields are ignored.
inline Frame decode(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.remove_suffix(1);
    }
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw decode_error(DecodeErrc::malformed, e.what());
    }
    if (!obj.is_object()) {
        throw decode_error(DecodeErrc::malformed, "frame is not a JSON object");
    }
    const std::string t = detail::get_string(obj, "t");
    using namespace detail;
    if (t == "hello") {
        Hello h;
        const std::string role = get_string(obj, "role");
        if (role == "operator") h.role = Role::Operator;
        else if (role == "robot") h.role = Role::Robot;
        else if (role == "console") h.role = Role::Console;
        else throw decode_error(DecodeErrc::bad_enum, "unknown role '" + role + "'");
        h.session = get_string(obj, "session");
        h.proto_version = static_cast<int>(get_int(obj, "proto_version"));
        return h;
    }
    if (t == "cmd") {
        Cmd c;
        const std::string axis = get_string(obj, "axis");
        auto a = probe::axis_from_wire(axis);
        if (!a) {
            throw decode_error(DecodeErrc::bad_enum, "unknown axis '" + axis + "'");
        }
        c.axis = *a;
        const std::int64_t dir = get_int(obj, "dir");
        if (dir != 1 && dir != -1) {
            throw decode_error(DecodeErrc::bad_enum, "dir must be -1 or +1");
        }
        c.dir = static_cast<int>(dir);
        c.on = get_bool(obj, "on");
        c.seq = get_int(obj, "seq");
        c.ts_ms = get_int(obj, "ts_ms");
        return c;
    }
    if (t == "imu") {
        return Imu{get_real(obj, "roll_deg"), get_real(obj, "pitch_deg"), get_real(obj, "yaw_deg"),
                   get_int(obj, "seq"), get_int(obj, "ts_ms")};
    }
    if (t == "hb") {
        return Heartbeat{get_int(obj, "seq"), get_int(obj, "ts_ms")};
    }
    if (t == "ack") {
        return Ack{get_int(obj, "ack_seq"), get_int(obj, "ts_ms")};
    }
    if (t == "err") {
        return Error{get_string(obj, "code"), get_string(obj, "detail")};
    }
    throw decode_error(DecodeErrc::unknown_type, "unknown frame type '" + t + "'");
}

} // namespace teleprobe::protocol
