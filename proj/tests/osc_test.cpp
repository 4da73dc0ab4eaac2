#include "osc.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>

using namespace mrdaw;
using namespace mrdaw::osc;

namespace {

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

void append_str(std::vector<std::uint8_t>& out, const char* s) {
  const std::size_t n = std::strlen(s) + 1;
  out.insert(out.end(), s, s + n - 1);
  out.push_back(0);
  while (out.size() % 4) out.push_back(0);
}

DecodeErrc decode_error(const std::vector<std::uint8_t>& b, std::size_t* offset = nullptr) {
  try {
    decode(b);
  } catch (const DecodeError& e) {
    if (offset) *offset = e.offset();
    return e.kind();
  }
  FAIL("decode unexpectedly succeeded");
  return DecodeErrc::truncated;
}

}  // namespace

TEST_CASE("encode: pedal message with no arguments") {
  const auto b = encode(record_message(1));
  // Oracle, by hand: 21-char address + NUL padded to 24, then ",\0\0\0".
  std::vector<std::uint8_t> expected;
  append_str(expected, "/mrdaw/1/pedal/record");
  append_str(expected, ",");
  CHECK(expected.size() == 28);
  CHECK(b == expected);
}

TEST_CASE("encode: one int32 argument") {
  const auto b = encode({"/a", {std::int32_t{5}}});
  CHECK(b == bytes_of({'/', 'a', 0, 0, ',', 'i', 0, 0, 0, 0, 0, 5}));
}

TEST_CASE("encode: float, string and blob layout") {
  const auto b = encode({"/x", {1.0f, std::string("hey"), Blob{{1, 2, 3, 4, 5}}}});
  const auto expected = bytes_of({'/',  'x',  0,   0, ',', 'f', 's', 'b', 0, 0, 0, 0,  //
                                  0x3f, 0x80, 0,   0,                                  // 1.0f big-endian
                                  'h',  'e',  'y', 0,                                  //
                                  0,    0,    0,   5, 1,   2,   3,   4,   5, 0, 0, 0});
  CHECK(b == expected);
  CHECK(decode(b) == Message{"/x", {1.0f, std::string("hey"), Blob{{1, 2, 3, 4, 5}}}});
}

TEST_CASE("encode rejects bad addresses and strings") {
  CHECK_THROWS_AS(encode({"bad", {}}), Error);
  CHECK_THROWS_AS(encode({"", {}}), Error);
  CHECK_THROWS_AS(encode({"/has space", {}}), Error);
  CHECK_THROWS_AS(encode({"/a", {std::string("x\0y", 3)}}), Error);
}

TEST_CASE("decode errors name the offset") {
  std::size_t at = 0;
  CHECK(decode_error(bytes_of({'/', 'a', 'b'}), &at) == DecodeErrc::truncated);
  CHECK(at == 3);
  CHECK(decode_error({}, &at) == DecodeErrc::truncated);
  CHECK(at == 0);

  CHECK(decode_error(bytes_of({'/', 'a', 0, 0, ',', 'd', 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}), &at) ==
        DecodeErrc::unsupported_tag);
  CHECK(at == 5);

  CHECK(decode_error(bytes_of({'/', 'a', 0, 7}), &at) == DecodeErrc::bad_padding);
  CHECK(at == 3);

  CHECK(decode_error(bytes_of({'/', 'a', 0, 0, ',', 'i', 0, 0, 0, 0}), &at) == DecodeErrc::truncated);
  CHECK(at == 10);

  CHECK(decode_error(bytes_of({'#', 'b', 'u', 'n', 'd', 'l', 'e', 0}), &at) == DecodeErrc::bad_address);
  CHECK(decode_error(bytes_of({'/', 'a', 0, 0, 'i', 0, 0, 0}), &at) == DecodeErrc::bad_type_tags);
  CHECK(at == 4);
  CHECK(decode_error(bytes_of({'/', 'a', 0, 0, ',', 0, 0, 0, 1, 2, 3, 4}), &at) ==
        DecodeErrc::trailing_bytes);
  CHECK(at == 8);
}

TEST_CASE("decode accepts a missing type tag string") {
  CHECK(decode(bytes_of({'/', 'a', 0, 0})) == Message{"/a", {}});
}

TEST_CASE("unknown addresses decode; routing rejects them") {
  const Message m = decode(encode({"/foo", {}}));
  CHECK(m.address == "/foo");
  CHECK_FALSE(route_upstream(m));
}

TEST_CASE("upstream routing") {
  auto ctl = [](const Message& m) { return std::get<ControlCommand>(*route_upstream(m)); };
  CHECK(ctl(record_message(1)).kind == EventKind::record_toggle);
  CHECK(ctl(play_message(2)).kind == EventKind::play_all);
  CHECK(ctl(stop_message(2)).user == 2);
  const auto t = ctl(toggle_message(1, 6));
  CHECK(t.kind == EventKind::track_toggle);
  CHECK(t.track == 6);
  const auto hello = std::get<HelloCommand>(*route_upstream(hello_message(2, "quest-b")));
  CHECK(hello.user == 2);
  CHECK(hello.client_name == "quest-b");

  // Button controllers send 1 on press and 0 on release.
  CHECK(route_upstream({"/mrdaw/1/pedal/record", {1.0f}}));
  CHECK(std::holds_alternative<ReleaseCommand>(*route_upstream({"/mrdaw/1/pedal/record", {0.0f}})));
  CHECK(std::holds_alternative<ReleaseCommand>(*route_upstream({"/mrdaw/2/ui/track/5/toggle", {0}})));
  CHECK_FALSE(route_upstream({"/mrdaw/1/pedal/record", {std::string("x")}}));
  CHECK_FALSE(route_upstream({"/mrdaw/1/pedal/loop", {0}}));
  CHECK_FALSE(route_upstream({"/mrdaw/x/pedal/record", {}}));
  CHECK_FALSE(route_upstream({"/mrdaw/1/pedal/loop", {}}));
  CHECK_FALSE(route_upstream({"/mrdaw/1/ui/track/-1/toggle", {}}));
  CHECK_FALSE(route_upstream({"/mrdaw/1/hello", {std::int32_t{3}}}));
}

TEST_CASE("downstream messages") {
  CHECK(track_state_message(3, "recording") == Message{"/mrdaw/state/track/3", {std::string("recording")}});
  CHECK(transport_message(Transport::playing) == Message{"/mrdaw/state/transport", {std::string("playing")}});
  CHECK(looplen_message(0) == Message{"/mrdaw/state/looplen", {std::int32_t{0}}});
  CHECK(looplen_message(48000) == Message{"/mrdaw/state/looplen", {std::int32_t{48000}}});
}

TEST_CASE("round trip and alignment on random messages") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    Message m{"/mrdaw/" + std::to_string(rng() % 5) + "/x", {}};
    const int n = rng() % 6;
    for (int k = 0; k < n; ++k) {
      switch (rng() % 4) {
        case 0: m.args.emplace_back(static_cast<std::int32_t>(rng())); break;
        case 1: m.args.emplace_back(std::bit_cast<float>(static_cast<std::uint32_t>(rng()))); break;
        case 2: m.args.emplace_back(std::string(rng() % 9, 'a' + rng() % 26)); break;
        case 3: m.args.emplace_back(Blob{std::vector<std::uint8_t>(rng() % 9, 0xab)}); break;
      }
    }
    const auto b = encode(m);
    CHECK(b.size() % 4 == 0);
    CHECK(decode(b) == m);
  }
}
