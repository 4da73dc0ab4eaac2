#pragma once

// OSC 1.0 message codec (int32, float32, string, blob; no bundles) and the
// session's address map.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "session.hpp"

namespace mrdaw::osc {

struct Blob {
  std::vector<std::uint8_t> bytes;
  bool operator==(const Blob&) const = default;
};

using Arg = std::variant<std::int32_t, float, std::string, Blob>;

struct Message {
  std::string address;
  std::vector<Arg> args;

  bool operator==(const Message& other) const;
};

enum class DecodeErrc { truncated, bad_padding, bad_address, bad_type_tags, unsupported_tag, trailing_bytes };

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrc kind, std::size_t offset);
  DecodeErrc kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  DecodeErrc kind_;
  std::size_t offset_;
};

const char* to_string(DecodeErrc e);

bool is_valid_address(std::string_view address);

// Throws Error(invalid_argument) for a bad address or a string argument with
// an embedded NUL.
std::vector<std::uint8_t> encode(const Message& msg);

// Throws DecodeError.
Message decode(std::span<const std::uint8_t> bytes);

// --- address map -----------------------------------------------------------

struct HelloCommand {
  UserId user = 0;
  std::string client_name;
};

struct ControlCommand {
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;
};

// A pedal or button message carrying a zero value: a recognised release that
// triggers nothing.
struct ReleaseCommand {
  UserId user = 0;
};

using Upstream = std::variant<HelloCommand, ControlCommand, ReleaseCommand>;

// Maps a client message onto a command; nullopt for addresses outside the
// map or with the wrong argument types. Range checks are left to the session.
std::optional<Upstream> route_upstream(const Message& msg);

Message record_message(UserId user);
Message play_message(UserId user);
Message stop_message(UserId user);
Message toggle_message(UserId user, TrackIndex track);
Message hello_message(UserId user, std::string client_name = {});
Message control_message(const ControlCommand& cmd);

Message track_state_message(TrackIndex track, std::string_view state);
Message transport_message(Transport t);
Message looplen_message(SampleIndex samples);
Message seq_message(std::uint64_t seq);
Message debug_message(std::string text);

}  // namespace mrdaw::osc
