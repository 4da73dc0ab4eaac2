#include "daw.hpp"

#include "error.hpp"

namespace mrdaw {

const char* to_string(CallKind k) {
  switch (k) {
    case CallKind::start_capture: return "start_capture";
    case CallKind::stop_capture: return "stop_capture";
    case CallKind::enable: return "enable";
    case CallKind::disable: return "disable";
    case CallKind::transport_start: return "transport_start";
    case CallKind::transport_stop: return "transport_stop";
  }
  return "?";
}

std::vector<BackendCall> translate_effects(const std::vector<EffectCommand>& effects) {
  std::vector<BackendCall> calls;
  calls.reserve(effects.size());
  for (const EffectCommand& e : effects) {
    switch (e.kind) {
      case EffectKind::start_capture: calls.push_back({CallKind::start_capture, e.track}); break;
      case EffectKind::stop_capture_and_finalize: calls.push_back({CallKind::stop_capture, e.track}); break;
      case EffectKind::transport_start: calls.push_back({CallKind::transport_start, 0}); break;
      case EffectKind::transport_stop: calls.push_back({CallKind::transport_stop, 0}); break;
      case EffectKind::track_enable: calls.push_back({CallKind::enable, e.track}); break;
      case EffectKind::track_disable: calls.push_back({CallKind::disable, e.track}); break;
      case EffectKind::broadcast: break;
    }
  }
  return calls;
}

DispatchReport dispatch(const std::vector<EffectCommand>& effects, DawBackend& backend) {
  DispatchReport report;
  report.calls = translate_effects(effects);
  for (const BackendCall& c : report.calls) {
    try {
      switch (c.kind) {
        case CallKind::start_capture: backend.start_capture(c.track); break;
        case CallKind::stop_capture: backend.stop_capture(c.track); break;
        case CallKind::enable: backend.enable(c.track); break;
        case CallKind::disable: backend.disable(c.track); break;
        case CallKind::transport_start: backend.transport_start(); break;
        case CallKind::transport_stop: backend.transport_stop(); break;
      }
    } catch (const std::exception& e) {
      report.failures.push_back(std::string(to_string(c.kind)) + "(" + std::to_string(c.track) +
                                "): " + e.what());
    }
  }
  return report;
}

osc::Message osc_out_translate(const BackendCall& call) {
  const auto track = static_cast<std::int32_t>(call.track);
  switch (call.kind) {
    // Firing a session-view clip slot toggles recording into it.
    case CallKind::start_capture:
    case CallKind::stop_capture: return {"/live/clip_slot/fire", {track, std::int32_t{0}}};
    case CallKind::enable: return {"/live/clip/fire", {track, std::int32_t{0}}};
    case CallKind::disable: return {"/live/clip/stop", {track, std::int32_t{0}}};
    case CallKind::transport_start: return {"/live/song/start_playing", {}};
    case CallKind::transport_stop: return {"/live/song/stop_playing", {}};
  }
  return {"/live/song/stop_playing", {}};
}

const SessionState& MockBackend::bound() const {
  if (!state_) throw Error(Errc::invalid_argument, "mock backend has no bound session state");
  return *state_;
}

void MockBackend::start_capture(TrackIndex track) {
  log_.push_back({CallKind::start_capture, track});
  const SessionState& s = bound();
  const SampleIndex phase = s.master_len ? s.playhead % *s.master_len : 0;
  audio_.open_capture(track, s.tracks.at(track).started_at, phase);
}

void MockBackend::stop_capture(TrackIndex track) {
  log_.push_back({CallKind::stop_capture, track});
  const SessionState& s = bound();
  auto cap = audio_.take_capture(track);
  if (!cap) {
    diagnostics_.push_back("stop_capture on track " + std::to_string(track) + " without capture");
    return;
  }
  const auto& t = s.tracks.at(track);
  if (!t.content || !s.master_len) {
    diagnostics_.push_back("track " + std::to_string(track) + " finalized without content id");
    return;
  }
  const SampleIndex len = *s.master_len;

  LoopBuffer loop;
  if (!known_len_) {
    FinalizedLoop f = finalize_loop(*cap, std::nullopt);
    if (f.master_len != len) {
      diagnostics_.push_back("first take is " + std::to_string(f.master_len) + " samples, session says " +
                             std::to_string(len));
      f = finalize_loop(*cap, len);
    }
    loop = std::move(f.loop);
    known_len_ = len;
    audio_.rebase_captures(s.epoch, len);
  } else if (cap->samples.empty()) {
    // Nothing reached the capture (transport stopped throughout).
    diagnostics_.push_back("track " + std::to_string(track) + " captured no audio");
    loop.samples.assign(len, 0.0f);
  } else {
    loop = finalize_loop(*cap, len).loop;
  }
  audio_.store(*t.content, std::move(loop));
}

}  // namespace mrdaw
