#include "snapshot.hpp"

#include "error.hpp"

namespace mrdaw {

using nlohmann::json;

const char* to_string(TrackLabel l) {
  switch (l) {
    case TrackLabel::empty: return "empty";
    case TrackLabel::recording: return "recording";
    case TrackLabel::playing: return "playing";
    case TrackLabel::muted: return "muted";
    case TrackLabel::selected: return "selected";
  }
  return "?";
}

std::optional<TrackLabel> parse_track_label(std::string_view s) {
  for (auto l : {TrackLabel::empty, TrackLabel::recording, TrackLabel::playing, TrackLabel::muted,
                 TrackLabel::selected})
    if (s == to_string(l)) return l;
  return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::record_toggle, EventKind::play_all, EventKind::stop_all, EventKind::track_toggle})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

SnapshotView make_view(const SessionState& state) {
  SnapshotView v;
  v.transport = state.transport;
  v.looplen = state.master_len.value_or(0);
  v.cursors = state.cursors;
  const auto selected = selected_tracks(state);
  v.tracks.reserve(state.tracks.size());
  v.owners.reserve(state.tracks.size());
  for (TrackIndex i = 0; i < state.tracks.size(); ++i) {
    const TrackState& t = state.tracks[i];
    TrackLabel label = TrackLabel::empty;
    switch (t.variant) {
      case TrackVariant::empty: label = TrackLabel::empty; break;
      case TrackVariant::recording: label = TrackLabel::recording; break;
      case TrackVariant::playing: label = TrackLabel::playing; break;
      case TrackVariant::muted: label = TrackLabel::muted; break;
    }
    if (t.owner >= 1 && selected[t.owner - 1] == i) label = TrackLabel::selected;
    v.tracks.push_back(label);
    v.owners.push_back(t.owner);
  }
  return v;
}

json view_to_json(const SnapshotView& view) {
  json tracks = json::array();
  for (std::size_t i = 0; i < view.tracks.size(); ++i)
    tracks.push_back({{"index", i}, {"state", to_string(view.tracks[i])}, {"owner", view.owners[i]}});
  json cursors = json::object();
  for (std::size_t u = 0; u < view.cursors.size(); ++u) cursors[std::to_string(u + 1)] = view.cursors[u];
  return {{"transport", view.transport == Transport::playing ? "playing" : "stopped"},
          {"looplen", view.looplen},
          {"tracks", std::move(tracks)},
          {"cursors", std::move(cursors)}};
}

SnapshotView view_from_json(const json& j) {
  try {
    SnapshotView v;
    const std::string transport = j.at("transport").get<std::string>();
    if (transport != "playing" && transport != "stopped")
      throw Error(Errc::parse, "bad transport '" + transport + "'");
    v.transport = transport == "playing" ? Transport::playing : Transport::stopped;
    v.looplen = j.at("looplen").get<SampleIndex>();
    for (const json& t : j.at("tracks")) {
      const auto label = parse_track_label(t.at("state").get<std::string>());
      if (!label) throw Error(Errc::parse, "bad track state " + t.at("state").dump());
      v.tracks.push_back(*label);
      v.owners.push_back(t.at("owner").get<UserId>());
    }
    const json& cursors = j.at("cursors");
    v.cursors.resize(cursors.size());
    for (auto it = cursors.begin(); it != cursors.end(); ++it) {
      const std::size_t u = std::stoul(it.key());
      if (u < 1 || u > v.cursors.size()) throw Error(Errc::parse, "bad cursor user " + it.key());
      v.cursors[u - 1] = it.value().get<TrackIndex>();
    }
    return v;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("malformed snapshot: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(Errc::parse, std::string("malformed snapshot: ") + e.what());
  }
}

json panel_state_message(const SnapshotView& view, std::uint64_t seq) {
  json j = view_to_json(view);
  j["type"] = "state";
  j["seq"] = seq;
  return j;
}

json panel_error_message(std::string_view message) {
  return {{"type", "error"}, {"message", std::string(message)}};
}

std::vector<osc::Message> osc_state_messages(const SnapshotView& view, std::uint64_t seq) {
  std::vector<osc::Message> out;
  out.reserve(view.tracks.size() + 3);
  out.push_back(osc::seq_message(seq));
  out.push_back(osc::transport_message(view.transport));
  out.push_back(osc::looplen_message(view.looplen));
  for (TrackIndex i = 0; i < view.tracks.size(); ++i)
    out.push_back(osc::track_state_message(i, to_string(view.tracks[i])));
  return out;
}

PanelInbound parse_panel_message(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::parse, "not a JSON object");
  auto field = [&](const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) throw Error(Errc::parse, std::string("missing field '") + name + "'");
    return *it;
  };
  const json& type = field("type");
  const json& user = field("user");
  if (!type.is_string()) throw Error(Errc::parse, "'type' must be a string");
  if (!user.is_number_unsigned()) throw Error(Errc::parse, "'user' must be a positive integer");
  const auto uid = user.get<std::uint64_t>();
  if (uid > 0xffffffffu) throw Error(Errc::parse, "'user' out of range");

  if (type == "hello") return PanelHello{static_cast<UserId>(uid)};
  if (type != "event") throw Error(Errc::parse, "unsupported message type " + type.dump());

  const json& event = field("event");
  if (!event.is_string()) throw Error(Errc::parse, "'event' must be a string");
  const auto kind = parse_event_kind(event.get<std::string>());
  if (!kind) throw Error(Errc::parse, "unknown event " + event.dump());
  PanelEvent ev{static_cast<UserId>(uid), *kind, 0};
  if (*kind == EventKind::track_toggle) {
    const json& track = field("track");
    if (!track.is_number_unsigned() || track.get<std::uint64_t>() > 0xffffffffu)
      throw Error(Errc::parse, "'track' must be a non-negative integer");
    ev.track = track.get<TrackIndex>();
  }
  return ev;
}

}  // namespace mrdaw
