#pragma once

// Collaborative looping protocol as a pure state machine. No I/O, no clocks:
// every transition is driven by a timestamped ControlEvent and reports the
// side effects the audio and DAW planes have to carry out.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mrdaw {

using UserId = std::uint32_t;      // 1-based, as printed on the pedals
using TrackIndex = std::uint32_t;  // 0-based, global across all users
using SampleIndex = std::uint64_t;
using LoopId = std::uint64_t;

struct SessionConfig {
  std::uint32_t num_users = 2;
  std::uint32_t tracks_per_user = 4;
  std::uint32_t sample_rate = 48000;
  float talk_gain = 1.0f;
  // Per-track linear gain; tracks past the end of the vector use 1.0.
  std::vector<float> track_gain;

  std::uint32_t total_tracks() const { return num_users * tracks_per_user; }
  float gain_of(TrackIndex track) const { return track < track_gain.size() ? track_gain[track] : 1.0f; }
  // Throws Error(invalid_argument) when a field is out of range.
  void validate() const;

  bool operator==(const SessionConfig&) const = default;
};

enum class TrackVariant { empty, recording, playing, muted };

struct TrackState {
  TrackVariant variant = TrackVariant::empty;
  SampleIndex started_at = 0;  // only meaningful while recording
  UserId owner = 0;
  std::optional<LoopId> content;

  bool filled() const { return variant == TrackVariant::playing || variant == TrackVariant::muted; }
  bool operator==(const TrackState&) const = default;
};

enum class Transport { stopped, playing };

struct SessionState {
  SessionConfig config;
  Transport transport = Transport::stopped;
  std::optional<SampleIndex> master_len;
  SampleIndex playhead = 0;
  SampleIndex epoch = 0;
  std::vector<TrackState> tracks;
  // Indexed by user - 1; holds a global track index inside that user's slots.
  std::vector<TrackIndex> cursors;
  LoopId next_loop_id = 1;

  bool operator==(const SessionState&) const = default;
};

enum class EventKind { record_toggle, play_all, stop_all, track_toggle };

struct ControlEvent {
  SampleIndex t = 0;
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;  // track_toggle only

  bool operator==(const ControlEvent&) const = default;
};

enum class EffectKind {
  start_capture,
  stop_capture_and_finalize,
  transport_start,
  transport_stop,
  track_enable,
  track_disable,
  // Publish ApplyResult::state to clients.
  broadcast,
};

struct EffectCommand {
  EffectKind kind = EffectKind::broadcast;
  UserId user = 0;
  TrackIndex track = 0;

  bool operator==(const EffectCommand&) const = default;
};

struct ApplyResult {
  SessionState state;
  std::vector<EffectCommand> effects;
  // Set when the event was rejected; state is then the input state.
  std::optional<std::string> rejection;

  bool accepted() const { return !rejection.has_value(); }
};

SessionState make_session(SessionConfig config);

// First and one-past-last global track index owned by `user`.
std::pair<TrackIndex, TrackIndex> owned_tracks(const SessionConfig& config, UserId user);
bool is_valid_user(const SessionConfig& config, UserId user);

ApplyResult apply_event(const SessionState& state, const ControlEvent& ev);

// Moves the user's cursor to the next empty slot after it (cyclically).
// With no empty slot left the cursor steps to the following slot, so a full
// allocation is overwritten in order starting again from the first slot.
SessionState advance_cursor(SessionState state, UserId user);

// Per user (index user - 1): the cursor track when it is empty.
std::vector<std::optional<TrackIndex>> selected_tracks(const SessionState& state);

SessionState reset_session(const SessionState& state);

const char* to_string(TrackVariant v);
const char* to_string(EventKind k);
const char* to_string(EffectKind k);

}  // namespace mrdaw
