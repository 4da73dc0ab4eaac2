#include "session.hpp"

#include <cmath>

#include "error.hpp"

namespace mrdaw {

namespace {

bool in_unit_range(float g) { return std::isfinite(g) && g >= 0.0f && g <= 1.0f; }

ApplyResult reject(const SessionState& state, std::string why) {
  return ApplyResult{state, {}, std::move(why)};
}

}  // namespace

void SessionConfig::validate() const {
  if (num_users < 1) throw Error(Errc::invalid_argument, "num_users must be >= 1");
  if (tracks_per_user < 1) throw Error(Errc::invalid_argument, "tracks_per_user must be >= 1");
  if (std::uint64_t{num_users} * tracks_per_user > 4096)
    throw Error(Errc::invalid_argument, "too many tracks (limit 4096)");
  if (sample_rate == 0) throw Error(Errc::invalid_argument, "sample_rate must be > 0");
  if (!in_unit_range(talk_gain)) throw Error(Errc::invalid_argument, "talk_gain must be in [0,1]");
  if (track_gain.size() > total_tracks()) throw Error(Errc::invalid_argument, "more track gains than tracks");
  for (float g : track_gain)
    if (!in_unit_range(g)) throw Error(Errc::invalid_argument, "track gain must be in [0,1]");
}

SessionState make_session(SessionConfig config) {
  config.validate();
  SessionState s;
  s.config = std::move(config);
  s.tracks.resize(s.config.total_tracks());
  s.cursors.resize(s.config.num_users);
  for (UserId u = 1; u <= s.config.num_users; ++u) {
    auto [first, last] = owned_tracks(s.config, u);
    for (TrackIndex i = first; i < last; ++i) s.tracks[i].owner = u;
    s.cursors[u - 1] = first;
  }
  return s;
}

std::pair<TrackIndex, TrackIndex> owned_tracks(const SessionConfig& config, UserId user) {
  const TrackIndex first = (user - 1) * config.tracks_per_user;
  return {first, first + config.tracks_per_user};
}

bool is_valid_user(const SessionConfig& config, UserId user) { return user >= 1 && user <= config.num_users; }

ApplyResult apply_event(const SessionState& state, const ControlEvent& ev) {
  if (!is_valid_user(state.config, ev.user))
    return reject(state, "unknown user id " + std::to_string(ev.user));

  ApplyResult r{state, {}, std::nullopt};
  SessionState& s = r.state;
  auto& fx = r.effects;

  switch (ev.kind) {
    case EventKind::record_toggle: {
      auto [first, last] = owned_tracks(s.config, ev.user);
      std::optional<TrackIndex> recording;
      for (TrackIndex i = first; i < last; ++i)
        if (s.tracks[i].variant == TrackVariant::recording) recording = i;

      if (!recording) {
        if (s.transport == Transport::stopped) {
          s.transport = Transport::playing;
          s.epoch = ev.t;
          s.playhead = 0;
          fx.push_back({EffectKind::transport_start, 0, 0});
        }
        const TrackIndex i = s.cursors[ev.user - 1];
        // Overwriting a filled slot drops its loop right away.
        s.tracks[i] = TrackState{TrackVariant::recording, ev.t, ev.user, std::nullopt};
        fx.push_back({EffectKind::start_capture, ev.user, i});
      } else {
        const TrackIndex i = *recording;
        const SampleIndex started = s.tracks[i].started_at;
        if (ev.t <= started) return reject(state, "empty capture on track " + std::to_string(i));
        if (!s.master_len) {
          // The first finished take defines the loop; its downbeat is where it began.
          s.master_len = ev.t - started;
          s.epoch = started;
          s.playhead = 0;
        }
        s.tracks[i] = TrackState{TrackVariant::playing, 0, ev.user, s.next_loop_id++};
        fx.push_back({EffectKind::stop_capture_and_finalize, ev.user, i});
        fx.push_back({EffectKind::track_enable, 0, i});
        s = advance_cursor(std::move(s), ev.user);
      }
      break;
    }
    case EventKind::play_all:
      s.transport = Transport::playing;
      s.playhead = 0;
      s.epoch = ev.t;
      fx.push_back({EffectKind::transport_start, 0, 0});
      break;
    case EventKind::stop_all:
      s.transport = Transport::stopped;
      fx.push_back({EffectKind::transport_stop, 0, 0});
      break;
    case EventKind::track_toggle: {
      if (ev.track >= s.tracks.size())
        return reject(state, "track index " + std::to_string(ev.track) + " out of range");
      TrackState& t = s.tracks[ev.track];
      if (t.variant == TrackVariant::playing) {
        t.variant = TrackVariant::muted;
        fx.push_back({EffectKind::track_disable, 0, ev.track});
      } else if (t.variant == TrackVariant::muted) {
        t.variant = TrackVariant::playing;
        fx.push_back({EffectKind::track_enable, 0, ev.track});
      } else {
        return r;
      }
      break;
    }
  }
  fx.push_back({EffectKind::broadcast, 0, 0});
  return r;
}

SessionState advance_cursor(SessionState state, UserId user) {
  if (!is_valid_user(state.config, user)) return state;
  auto [first, last] = owned_tracks(state.config, user);
  const TrackIndex n = last - first;
  TrackIndex& cursor = state.cursors[user - 1];
  const TrackIndex slot = cursor - first;
  for (TrackIndex step = 1; step <= n; ++step) {
    const TrackIndex i = first + (slot + step) % n;
    if (state.tracks[i].variant == TrackVariant::empty) {
      cursor = i;
      return state;
    }
  }
  cursor = first + (slot + 1) % n;
  return state;
}

std::vector<std::optional<TrackIndex>> selected_tracks(const SessionState& state) {
  std::vector<std::optional<TrackIndex>> out(state.cursors.size());
  for (std::size_t u = 0; u < state.cursors.size(); ++u) {
    const TrackIndex c = state.cursors[u];
    if (state.tracks[c].variant == TrackVariant::empty) out[u] = c;
  }
  return out;
}

SessionState reset_session(const SessionState& state) { return make_session(state.config); }

const char* to_string(TrackVariant v) {
  switch (v) {
    case TrackVariant::empty: return "empty";
    case TrackVariant::recording: return "recording";
    case TrackVariant::playing: return "playing";
    case TrackVariant::muted: return "muted";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::record_toggle: return "record";
    case EventKind::play_all: return "play";
    case EventKind::stop_all: return "stop";
    case EventKind::track_toggle: return "toggle";
  }
  return "?";
}

const char* to_string(EffectKind k) {
  switch (k) {
    case EffectKind::start_capture: return "StartCapture";
    case EffectKind::stop_capture_and_finalize: return "StopCaptureAndFinalize";
    case EffectKind::transport_start: return "TransportStart";
    case EffectKind::transport_stop: return "TransportStop";
    case EffectKind::track_enable: return "TrackEnable";
    case EffectKind::track_disable: return "TrackDisable";
    case EffectKind::broadcast: return "Broadcast";
  }
  return "?";
}

}  // namespace mrdaw
