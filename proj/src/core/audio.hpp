#pragma once

// Sample-accurate audio plane: captures, loop finalization and the per-user
// mix of playing loops plus cross-fed talkback.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "session.hpp"

namespace mrdaw {

inline constexpr std::size_t kDefaultBlockSize = 256;

struct LoopBuffer {
  std::vector<float> samples;

  std::size_t length() const { return samples.size(); }
  bool operator==(const LoopBuffer&) const = default;
};

struct CaptureBuffer {
  std::vector<float> samples;
  // Loop position of samples[0]; 0 while no master length exists.
  SampleIndex start_phase = 0;
  SampleIndex started_at = 0;

  std::size_t length() const { return samples.size(); }
};

struct FinalizedLoop {
  LoopBuffer loop;
  SampleIndex master_len = 0;
};

// Normalizes a take to the loop length. Without a master length the take
// becomes the loop verbatim and defines it; otherwise sample k of the take
// lands at (start_phase + k) mod L, trimmed to L samples or zero-extended.
// Throws Error(empty_capture) for an empty take.
FinalizedLoop finalize_loop(const CaptureBuffer& cap, std::optional<SampleIndex> master_len);

void capture_append(CaptureBuffer& cap, std::span<const float> block);

using LoopStore = std::map<LoopId, std::shared_ptr<const LoopBuffer>>;

struct MixFrame {
  std::vector<std::vector<float>> outputs;  // one block per user
  SampleIndex playhead = 0;                 // playhead after this block
  std::vector<std::string> diagnostics;
};

// One block of output for every user. `live` holds one input block per user
// (index user - 1); a missing or short entry counts as silence.
// Throws Error(invalid_argument) when block is 0.
MixFrame mix_tick(const SessionState& state, const LoopStore& loops,
                  std::span<const std::span<const float>> live, std::size_t block);

// Offline bounce with silent live inputs, exactly `duration` samples per user.
std::vector<std::vector<float>> render_session(const SessionState& state, const LoopStore& loops,
                                               std::size_t duration, std::size_t block = kDefaultBlockSize);

// Owns in-flight captures and finalized loops for one session.
class AudioPlane {
 public:
  void open_capture(TrackIndex track, SampleIndex started_at, SampleIndex start_phase);
  std::optional<CaptureBuffer> take_capture(TrackIndex track);
  bool capturing(TrackIndex track) const { return captures_.count(track) != 0; }

  // Called once the master length appears: captures opened before that get
  // their phase relative to the new loop origin.
  void rebase_captures(SampleIndex epoch, SampleIndex master_len);

  // Appends the owner's live input to every open capture. After the loop
  // length is known, captures only advance while the transport runs.
  void capture_block(const SessionState& state, std::span<const std::span<const float>> live,
                     std::size_t frames);

  void store(LoopId id, LoopBuffer loop);
  // Drops loops no track refers to any more.
  void retain_referenced(const SessionState& state);
  void clear();

  const LoopStore& loops() const { return loops_; }
  const std::map<TrackIndex, CaptureBuffer>& captures() const { return captures_; }

 private:
  std::map<TrackIndex, CaptureBuffer> captures_;
  LoopStore loops_;
};

}  // namespace mrdaw
