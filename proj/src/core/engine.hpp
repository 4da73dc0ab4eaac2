#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "audio.hpp"
#include "daw.hpp"
#include "session.hpp"

namespace mrdaw {

// A running session on one logical thread: owns the state, the audio plane
// and the mock backend, and keeps the session clock in samples. Events are
// applied at the current clock; audio advances it.
class Engine {
 public:
  explicit Engine(SessionConfig config, std::size_t block_size = kDefaultBlockSize);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Extra backend that receives every call after the mock (e.g. OSC-out).
  void mirror_to(std::shared_ptr<DawBackend> backend) { mirror_ = std::move(backend); }

  ApplyResult submit(UserId user, EventKind kind, TrackIndex track = 0);

  // Captures and mixes `frames` samples in chunks of at most block_size.
  // `live` and `out` hold one span per user; `out` may be empty to discard
  // the mix, otherwise each span must hold `frames` samples.
  void process(std::span<const std::span<const float>> live, std::span<const std::span<float>> out,
               std::size_t frames);

  void reset();

  SampleIndex now() const { return now_; }
  std::size_t block_size() const { return block_size_; }
  const SessionState& state() const { return state_; }
  const AudioPlane& audio() const { return audio_; }
  const std::vector<BackendCall>& call_log() const { return mock_.log(); }
  std::vector<std::string> take_diagnostics() { return std::exchange(diagnostics_, {}); }

 private:
  static constexpr std::size_t kMaxDiagnostics = 256;
  void note(std::string diagnostic);

  SessionState state_;
  std::size_t block_size_;
  SampleIndex now_ = 0;
  AudioPlane audio_;
  MockBackend mock_;
  std::shared_ptr<DawBackend> mirror_;
  std::vector<std::string> diagnostics_;
};

}  // namespace mrdaw
