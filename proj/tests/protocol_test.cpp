#include <gtest/gtest.h>

#include <random>

#include "teleprobe/protocol/codec.hpp"
#include "teleprobe/protocol/line_buffer.hpp"
#include "properties.hpp"

using namespace teleprobe;
using namespace teleprobe::protocol;

namespace {

DecodeErrc decode_errc(std::string_view line) {
    try {
        (void)decode(line);
    } catch (const decode_error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode accepted: " << line;
    return DecodeErrc::malformed;
}

} // namespace

TEST(Encode, CmdLayout) {
    EXPECT_EQ(encode(Cmd{probe::AxisId::SteerLR, +1, true, 7, 100}),
              "{\"t\":\"cmd\",\"axis\":\"LR\",\"dir\":1,\"on\":true,\"seq\":7,\"ts_ms\":100}\n");
}

TEST(Encode, HeartbeatLayout) { EXPECT_EQ(encode(Heartbeat{1, 0}), "{\"t\":\"hb\",\"seq\":1,\"ts_ms\":0}\n"); }

TEST(Encode, OtherLayouts) {
    EXPECT_EQ(encode(Hello{Role::Console, "s1", 1}),
              "{\"t\":\"hello\",\"role\":\"console\",\"session\":\"s1\",\"proto_version\":1}\n");
    EXPECT_EQ(encode(Ack{4, 12}), "{\"t\":\"ack\",\"ack_seq\":4,\"ts_ms\":12}\n");
    EXPECT_EQ(encode(Error{"busy", "x"}), "{\"t\":\"err\",\"code\":\"busy\",\"detail\":\"x\"}\n");
    EXPECT_EQ(encode(Imu{1.5, -0.25, 12.34, 3, 40}),
              "{\"t\":\"imu\",\"roll_deg\":1.5,\"pitch_deg\":-0.25,\"yaw_deg\":12.34,\"seq\":3,\"ts_ms\":40}\n");
}

TEST(Encode, OversizeFrameRejected) {
    EXPECT_THROW(encode(Error{"x", std::string(2000, 'a')}), encode_error);
    EXPECT_NO_THROW(encode(Error{"x", std::string(900, 'a')}));
}

TEST(Decode, ValidCmd) {
    const auto f = decode("{\"t\":\"cmd\",\"axis\":\"UD\",\"dir\":-1,\"on\":false,\"seq\":9,\"ts_ms\":5}");
    ASSERT_TRUE(std::holds_alternative<Cmd>(f));
    EXPECT_EQ(std::get<Cmd>(f), (Cmd{probe::AxisId::SteerUD, -1, false, 9, 5}));
}

TEST(Decode, UnknownFieldsIgnored) {
    const auto f = decode("{\"t\":\"hb\",\"seq\":2,\"ts_ms\":3,\"future\":{\"x\":[1,2]}}\n");
    EXPECT_EQ(std::get<Heartbeat>(f), (Heartbeat{2, 3}));
}

TEST(Decode, DistinctErrorCodes) {
    EXPECT_EQ(decode_errc("{\"t\":\"cmd\",\"axis\":\"XX\",\"dir\":1,\"on\":true,\"seq\":1,\"ts_ms\":0}"),
              DecodeErrc::bad_enum);
    EXPECT_EQ(decode_errc("{\"t\":\"cmd\",\"axis\":\"LR\",\"dir\":2,\"on\":true,\"seq\":1,\"ts_ms\":0}"),
              DecodeErrc::bad_enum);
    EXPECT_EQ(decode_errc("{\"t\":\"hello\",\"role\":\"boss\",\"session\":\"\",\"proto_version\":1}"),
              DecodeErrc::bad_enum);
    EXPECT_EQ(decode_errc("{\"t\":\"cmd\",\"axis\":\"LR\""), DecodeErrc::malformed);
    EXPECT_EQ(decode_errc("[1,2]"), DecodeErrc::malformed);
    EXPECT_EQ(decode_errc("{\"t\":\"teleport\"}"), DecodeErrc::unknown_type);
    EXPECT_EQ(decode_errc("{\"t\":\"hb\",\"seq\":1}"), DecodeErrc::missing_field);
    EXPECT_EQ(decode_errc("{\"seq\":1}"), DecodeErrc::missing_field);
    EXPECT_EQ(decode_errc("{\"t\":\"hb\",\"seq\":\"one\",\"ts_ms\":0}"), DecodeErrc::bad_value);
    EXPECT_NE(errc_code(DecodeErrc::malformed), errc_code(DecodeErrc::bad_enum));
}

TEST(LineBuffer, TruncatedLineDoesNotCorruptNext) {
    LineBuffer lb;
    lb.feed("{\"t\":\"cmd\",\"axis\":\"LR\"\n");  // truncated frame
    lb.feed(encode(Heartbeat{5, 6}));
    auto bad = lb.next();
    ASSERT_TRUE(bad);
    EXPECT_THROW((void)decode(*bad), decode_error);
    auto good = lb.next();
    ASSERT_TRUE(good);
    EXPECT_EQ(std::get<Heartbeat>(decode(*good)), (Heartbeat{5, 6}));
    EXPECT_FALSE(lb.next());
}

TEST(LineBuffer, PartialFeedsAndOverflow) {
    const std::string line = encode(Ack{1, 2});
    LineBuffer lb(64);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        lb.feed(line.substr(i, 1));
        ASSERT_FALSE(lb.next());
    }
    lb.feed("\n");
    EXPECT_TRUE(lb.next());

    LineBuffer lb2(64);
    lb2.feed(line.substr(0, 10));
    EXPECT_FALSE(lb2.next());
    lb2.feed(line.substr(10));
    auto got = lb2.next();
    ASSERT_TRUE(got);
    EXPECT_EQ(std::get<Ack>(decode(*got)), (Ack{1, 2}));

    lb2.feed(std::string(200, 'z'));
    EXPECT_FALSE(lb2.next());
    lb2.feed("zzz\n");
    lb2.feed(encode(Ack{3, 4}));
    got = lb2.next();
    ASSERT_TRUE(got);
    EXPECT_EQ(std::get<Ack>(decode(*got)), (Ack{3, 4}));
    EXPECT_EQ(lb2.overflow_count(), 1u);
}

TEST(RoundTrip, RandomFramesThroughChunkedStreamWithCorruption) {
    properties::ProtocolStats st;
    const auto v = properties::protocol_suite(5000, 9, st);
    EXPECT_FALSE(v.has_value()) << *v;
    EXPECT_EQ(st.frames, 5000u);
    EXPECT_GT(st.corruptions, 100u);
    EXPECT_EQ(st.recovered_after_corruption, st.corruptions);
}
