#pragma once

// What clients see of a session: a full snapshot with derived "selected"
// markers, in panel JSON and OSC form.

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "osc.hpp"
#include "session.hpp"

namespace mrdaw {

enum class TrackLabel { empty, recording, playing, muted, selected };

const char* to_string(TrackLabel l);
std::optional<TrackLabel> parse_track_label(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct SnapshotView {
  Transport transport = Transport::stopped;
  SampleIndex looplen = 0;  // 0 = unset
  std::vector<TrackLabel> tracks;
  std::vector<UserId> owners;
  std::vector<TrackIndex> cursors;  // index user - 1

  bool operator==(const SnapshotView&) const = default;
};

SnapshotView make_view(const SessionState& state);

nlohmann::json view_to_json(const SnapshotView& view);
// Throws Error(parse) on a malformed object.
SnapshotView view_from_json(const nlohmann::json& j);

// {"type":"state","seq":N,...view}
nlohmann::json panel_state_message(const SnapshotView& view, std::uint64_t seq);
nlohmann::json panel_error_message(std::string_view message);

// seq, transport, looplen, then one message per track.
std::vector<osc::Message> osc_state_messages(const SnapshotView& view, std::uint64_t seq);

struct PanelHello {
  UserId user = 0;
};

struct PanelEvent {
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;
};

using PanelInbound = std::variant<PanelHello, PanelEvent>;

// Parses a client text frame. Throws Error(parse) with a readable reason.
PanelInbound parse_panel_message(std::string_view text);

}  // namespace mrdaw
