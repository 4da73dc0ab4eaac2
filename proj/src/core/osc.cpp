#include "osc.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <limits>

namespace mrdaw::osc {

namespace {

std::size_t pad4(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_padded(std::vector<std::uint8_t>& out, const std::uint8_t* data, std::size_t n, bool terminate) {
  out.insert(out.end(), data, data + n);
  const std::size_t used = n + (terminate ? 1 : 0);
  if (terminate) out.push_back(0);
  out.resize(out.size() + (pad4(used) - used), 0);
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  put_padded(out, reinterpret_cast<const std::uint8_t*>(s.data()), s.size(), true);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

  std::string read_string() {
    const std::uint8_t* begin = bytes_.data() + pos_;
    const void* nul = std::memchr(begin, 0, bytes_.size() - pos_);
    if (!nul) throw DecodeError(DecodeErrc::truncated, bytes_.size());
    const std::size_t len = static_cast<const std::uint8_t*>(nul) - begin;
    std::string s(reinterpret_cast<const char*>(begin), len);
    skip_padding(pos_ + len + 1);
    return s;
  }

  std::uint32_t read_u32() {
    if (bytes_.size() - pos_ < 4) throw DecodeError(DecodeErrc::truncated, bytes_.size());
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += 4;
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
  }

  Blob read_blob() {
    const std::size_t at = pos_;
    const std::uint32_t raw = read_u32();
    if (raw > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max()))
      throw DecodeError(DecodeErrc::truncated, at);
    if (bytes_.size() - pos_ < raw) throw DecodeError(DecodeErrc::truncated, bytes_.size());
    Blob b;
    b.bytes.assign(bytes_.begin() + pos_, bytes_.begin() + pos_ + raw);
    skip_padding(pos_ + raw);
    return b;
  }

 private:
  // Moves to the next 4-byte boundary after `end`, requiring zero fill.
  void skip_padding(std::size_t end) {
    const std::size_t next = pad4(end);
    if (next > bytes_.size()) throw DecodeError(DecodeErrc::truncated, bytes_.size());
    for (std::size_t i = end; i < next; ++i)
      if (bytes_[i] != 0) throw DecodeError(DecodeErrc::bad_padding, i);
    pos_ = next;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_path(std::string_view address) {
  std::vector<std::string_view> parts;
  std::size_t i = 1;
  while (i <= address.size()) {
    const std::size_t j = std::min(address.find('/', i), address.size());
    parts.push_back(address.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

std::optional<std::uint32_t> parse_index(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Pedal and button messages carry either nothing or a press value; a zero
// value is a button release and triggers nothing.
bool is_press(const std::vector<Arg>& args) {
  if (args.empty()) return true;
  if (args.size() != 1) return false;
  if (auto* i = std::get_if<std::int32_t>(&args[0])) return *i != 0;
  if (auto* f = std::get_if<float>(&args[0])) return *f != 0.0f;
  return false;
}

bool is_release(const std::vector<Arg>& args) {
  return args.size() == 1 && !is_press(args) &&
         (std::holds_alternative<std::int32_t>(args[0]) || std::holds_alternative<float>(args[0]));
}

}  // namespace

bool Message::operator==(const Message& other) const {
  if (address != other.address || args.size() != other.args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const Arg& a = args[i];
    const Arg& b = other.args[i];
    if (a.index() != b.index()) return false;
    // Floats compare by bit pattern so NaN payloads survive a round trip.
    if (auto* fa = std::get_if<float>(&a)) {
      if (std::bit_cast<std::uint32_t>(*fa) != std::bit_cast<std::uint32_t>(std::get<float>(b))) return false;
    } else if (a != b) {
      return false;
    }
  }
  return true;
}

DecodeError::DecodeError(DecodeErrc kind, std::size_t offset)
    : Error(Errc::decode,
            std::string("osc decode: ") + to_string(kind) + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

const char* to_string(DecodeErrc e) {
  switch (e) {
    case DecodeErrc::truncated: return "truncated packet";
    case DecodeErrc::bad_padding: return "bad padding";
    case DecodeErrc::bad_address: return "bad address";
    case DecodeErrc::bad_type_tags: return "bad type tag string";
    case DecodeErrc::unsupported_tag: return "unsupported type tag";
    case DecodeErrc::trailing_bytes: return "trailing bytes";
  }
  return "?";
}

bool is_valid_address(std::string_view address) {
  if (address.empty() || address.front() != '/') return false;
  for (char c : address) {
    if (c == '\0' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return false;
  }
  return true;
}

std::vector<std::uint8_t> encode(const Message& msg) {
  if (!is_valid_address(msg.address))
    throw Error(Errc::invalid_argument, "invalid OSC address '" + msg.address + "'");

  std::string tags = ",";
  for (const Arg& a : msg.args) {
    switch (a.index()) {
      case 0: tags += 'i'; break;
      case 1: tags += 'f'; break;
      case 2:
        if (std::get<std::string>(a).find('\0') != std::string::npos)
          throw Error(Errc::invalid_argument, "OSC string argument contains NUL");
        tags += 's';
        break;
      case 3:
        if (std::get<Blob>(a).bytes.size() >
            static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
          throw Error(Errc::invalid_argument, "OSC blob too large");
        tags += 'b';
        break;
    }
  }

  std::vector<std::uint8_t> out;
  put_string(out, msg.address);
  put_string(out, tags);
  for (const Arg& a : msg.args) {
    if (auto* i = std::get_if<std::int32_t>(&a)) {
      put_u32(out, static_cast<std::uint32_t>(*i));
    } else if (auto* f = std::get_if<float>(&a)) {
      put_u32(out, std::bit_cast<std::uint32_t>(*f));
    } else if (auto* s = std::get_if<std::string>(&a)) {
      put_string(out, *s);
    } else {
      const auto& b = std::get<Blob>(a).bytes;
      put_u32(out, static_cast<std::uint32_t>(b.size()));
      put_padded(out, b.data(), b.size(), false);
    }
  }
  return out;
}

Message decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw DecodeError(DecodeErrc::truncated, 0);
  if (bytes[0] != '/') throw DecodeError(DecodeErrc::bad_address, 0);

  Reader in(bytes);
  Message msg;
  msg.address = in.read_string();
  if (!is_valid_address(msg.address)) throw DecodeError(DecodeErrc::bad_address, 0);
  // Pre-1.0 senders may omit the type tag string entirely.
  if (in.at_end()) return msg;

  const std::size_t tags_at = in.pos();
  if (in.peek() != ',') throw DecodeError(DecodeErrc::bad_type_tags, tags_at);
  const std::string tags = in.read_string();

  for (std::size_t i = 1; i < tags.size(); ++i) {
    switch (tags[i]) {
      case 'i': msg.args.emplace_back(static_cast<std::int32_t>(in.read_u32())); break;
      case 'f': msg.args.emplace_back(std::bit_cast<float>(in.read_u32())); break;
      case 's': msg.args.emplace_back(in.read_string()); break;
      case 'b': msg.args.emplace_back(in.read_blob()); break;
      default: throw DecodeError(DecodeErrc::unsupported_tag, tags_at + i);
    }
  }
  if (!in.at_end()) throw DecodeError(DecodeErrc::trailing_bytes, in.pos());
  return msg;
}

std::optional<Upstream> route_upstream(const Message& msg) {
  const auto parts = split_path(msg.address);
  if (parts.size() < 3 || parts[0] != "mrdaw") return std::nullopt;
  const auto user = parse_index(parts[1]);
  if (!user) return std::nullopt;

  if (parts.size() == 3 && parts[2] == "hello") {
    if (msg.args.empty()) return HelloCommand{*user, {}};
    if (msg.args.size() == 1)
      if (auto* name = std::get_if<std::string>(&msg.args[0])) return HelloCommand{*user, *name};
    return std::nullopt;
  }

  std::optional<ControlCommand> cmd;
  if (parts.size() == 4 && parts[2] == "pedal") {
    if (parts[3] == "record") cmd = ControlCommand{*user, EventKind::record_toggle, 0};
    if (parts[3] == "play") cmd = ControlCommand{*user, EventKind::play_all, 0};
    if (parts[3] == "stop") cmd = ControlCommand{*user, EventKind::stop_all, 0};
  } else if (parts.size() == 6 && parts[2] == "ui" && parts[3] == "track" && parts[5] == "toggle") {
    if (const auto track = parse_index(parts[4]))
      cmd = ControlCommand{*user, EventKind::track_toggle, *track};
  }
  if (!cmd) return std::nullopt;
  if (is_press(msg.args)) return *cmd;
  if (is_release(msg.args)) return ReleaseCommand{*user};
  return std::nullopt;
}

namespace {
std::string user_prefix(UserId user) { return "/mrdaw/" + std::to_string(user); }
}  // namespace

Message record_message(UserId user) { return {user_prefix(user) + "/pedal/record", {}}; }
Message play_message(UserId user) { return {user_prefix(user) + "/pedal/play", {}}; }
Message stop_message(UserId user) { return {user_prefix(user) + "/pedal/stop", {}}; }

Message toggle_message(UserId user, TrackIndex track) {
  return {user_prefix(user) + "/ui/track/" + std::to_string(track) + "/toggle", {}};
}

Message hello_message(UserId user, std::string client_name) {
  return {user_prefix(user) + "/hello", {std::move(client_name)}};
}

Message control_message(const ControlCommand& cmd) {
  switch (cmd.kind) {
    case EventKind::record_toggle: return record_message(cmd.user);
    case EventKind::play_all: return play_message(cmd.user);
    case EventKind::stop_all: return stop_message(cmd.user);
    case EventKind::track_toggle: return toggle_message(cmd.user, cmd.track);
  }
  return record_message(cmd.user);
}

Message track_state_message(TrackIndex track, std::string_view state) {
  return {"/mrdaw/state/track/" + std::to_string(track), {std::string(state)}};
}

Message transport_message(Transport t) {
  return {"/mrdaw/state/transport", {std::string(t == Transport::playing ? "playing" : "stopped")}};
}

Message looplen_message(SampleIndex samples) {
  const auto clamped = std::min<SampleIndex>(samples, std::numeric_limits<std::int32_t>::max());
  return {"/mrdaw/state/looplen", {static_cast<std::int32_t>(clamped)}};
}

Message seq_message(std::uint64_t seq) {
  return {"/mrdaw/state/seq", {static_cast<std::int32_t>(seq & 0x7fffffff)}};
}

Message debug_message(std::string text) { return {"/mrdaw/debug", {std::move(text)}}; }

}  // namespace mrdaw::osc
