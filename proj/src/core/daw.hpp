#pragma once

// Backends for the DAW being controlled. The mock backend drives the local
// audio plane; the OSC-out backend mirrors the same calls to an
// AbletonOSC-style endpoint.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "audio.hpp"
#include "osc.hpp"
#include "session.hpp"

namespace mrdaw {

enum class CallKind { start_capture, stop_capture, enable, disable, transport_start, transport_stop };

struct BackendCall {
  CallKind kind = CallKind::transport_start;
  TrackIndex track = 0;

  bool operator==(const BackendCall&) const = default;
};

const char* to_string(CallKind k);

class DawBackend {
 public:
  virtual ~DawBackend() = default;
  virtual void start_capture(TrackIndex track) = 0;
  virtual void stop_capture(TrackIndex track) = 0;
  virtual void enable(TrackIndex track) = 0;
  virtual void disable(TrackIndex track) = 0;
  virtual void transport_start() = 0;
  virtual void transport_stop() = 0;
};

struct DispatchReport {
  std::vector<BackendCall> calls;
  std::vector<std::string> failures;
};

// One contract call per effect, in order; broadcasts map to nothing.
std::vector<BackendCall> translate_effects(const std::vector<EffectCommand>& effects);

// Issues the calls on `backend`. A throwing call is recorded as a failure
// and the remaining calls still run.
DispatchReport dispatch(const std::vector<EffectCommand>& effects, DawBackend& backend);

osc::Message osc_out_translate(const BackendCall& call);

// Executes calls against an AudioPlane, reading capture placement from the
// session snapshot bound before each dispatch.
class MockBackend final : public DawBackend {
 public:
  explicit MockBackend(AudioPlane& audio) : audio_(audio) {}

  void bind(const SessionState& state) { state_ = &state; }
  // Forget the loop length after a session reset.
  void reset() { known_len_.reset(); }

  void start_capture(TrackIndex track) override;
  void stop_capture(TrackIndex track) override;
  void enable(TrackIndex track) override { log_.push_back({CallKind::enable, track}); }
  void disable(TrackIndex track) override { log_.push_back({CallKind::disable, track}); }
  void transport_start() override { log_.push_back({CallKind::transport_start, 0}); }
  void transport_stop() override { log_.push_back({CallKind::transport_stop, 0}); }

  const std::vector<BackendCall>& log() const { return log_; }
  std::vector<std::string> take_diagnostics() { return std::exchange(diagnostics_, {}); }

 private:
  const SessionState& bound() const;

  AudioPlane& audio_;
  const SessionState* state_ = nullptr;
  std::optional<SampleIndex> known_len_;
  std::vector<BackendCall> log_;
  std::vector<std::string> diagnostics_;
};

class OscOutBackend final : public DawBackend {
 public:
  using Sender = std::function<void(const osc::Message&)>;
  explicit OscOutBackend(Sender send) : send_(std::move(send)) {}

  void start_capture(TrackIndex track) override { emit({CallKind::start_capture, track}); }
  void stop_capture(TrackIndex track) override { emit({CallKind::stop_capture, track}); }
  void enable(TrackIndex track) override { emit({CallKind::enable, track}); }
  void disable(TrackIndex track) override { emit({CallKind::disable, track}); }
  void transport_start() override { emit({CallKind::transport_start, 0}); }
  void transport_stop() override { emit({CallKind::transport_stop, 0}); }

 private:
  void emit(const BackendCall& call) { send_(osc_out_translate(call)); }

  Sender send_;
};

}  // namespace mrdaw
