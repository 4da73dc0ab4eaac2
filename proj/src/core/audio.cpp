#include "audio.hpp"

#include <algorithm>

#include "error.hpp"

namespace mrdaw {

FinalizedLoop finalize_loop(const CaptureBuffer& cap, std::optional<SampleIndex> master_len) {
  if (cap.samples.empty()) throw Error(Errc::empty_capture, "cannot finalize an empty capture");
  if (!master_len) return FinalizedLoop{LoopBuffer{cap.samples}, cap.samples.size()};

  const SampleIndex len = *master_len;
  if (len == 0) throw Error(Errc::invalid_argument, "master length must be > 0");
  LoopBuffer out;
  out.samples.assign(len, 0.0f);
  const std::size_t kept = std::min<std::size_t>(cap.samples.size(), len);
  std::size_t pos = cap.start_phase % len;
  for (std::size_t k = 0; k < kept; ++k) {
    out.samples[pos] = cap.samples[k];
    if (++pos == len) pos = 0;
  }
  return FinalizedLoop{std::move(out), len};
}

void capture_append(CaptureBuffer& cap, std::span<const float> block) {
  cap.samples.insert(cap.samples.end(), block.begin(), block.end());
}

MixFrame mix_tick(const SessionState& state, const LoopStore& loops,
                  std::span<const std::span<const float>> live, std::size_t block) {
  if (block == 0) throw Error(Errc::invalid_argument, "block size must be > 0");
  const std::size_t users = state.config.num_users;

  MixFrame frame;
  frame.playhead = state.playhead;
  std::vector<double> bed(block, 0.0);

  if (state.transport == Transport::playing && state.master_len) {
    const SampleIndex len = *state.master_len;
    const SampleIndex head = state.playhead % len;
    for (TrackIndex i = 0; i < state.tracks.size(); ++i) {
      const TrackState& t = state.tracks[i];
      if (t.variant != TrackVariant::playing) continue;
      auto it = t.content ? loops.find(*t.content) : loops.end();
      if (it == loops.end() || !it->second) {
        frame.diagnostics.push_back("track " + std::to_string(i) + " has no loop content");
        continue;
      }
      const auto& data = it->second->samples;
      if (data.size() != len) {
        frame.diagnostics.push_back("track " + std::to_string(i) + " loop length mismatch");
        continue;
      }
      const double gain = state.config.gain_of(i);
      std::size_t pos = head;
      for (std::size_t k = 0; k < block; ++k) {
        bed[k] += gain * static_cast<double>(data[pos]);
        if (++pos == len) pos = 0;
      }
    }
    frame.playhead = (head + block) % len;
  }

  std::vector<const float*> inputs(users, nullptr);
  for (std::size_t v = 0; v < users; ++v) {
    if (v < live.size() && live[v].size() >= block)
      inputs[v] = live[v].data();
    else
      frame.diagnostics.push_back("missing live input for user " + std::to_string(v + 1));
  }

  const double talk_gain = state.config.talk_gain;
  frame.outputs.assign(users, std::vector<float>(block, 0.0f));
  for (std::size_t u = 0; u < users; ++u) {
    auto& out = frame.outputs[u];
    for (std::size_t k = 0; k < block; ++k) {
      double talk = 0.0;
      for (std::size_t v = 0; v < users; ++v)
        if (v != u && inputs[v]) talk += static_cast<double>(inputs[v][k]);
      const double mixed = bed[k] + talk_gain * talk;
      out[k] = static_cast<float>(std::clamp(mixed, -1.0, 1.0));
    }
  }
  return frame;
}

std::vector<std::vector<float>> render_session(const SessionState& state, const LoopStore& loops,
                                               std::size_t duration, std::size_t block) {
  if (block == 0) throw Error(Errc::invalid_argument, "block size must be > 0");
  const std::size_t users = state.config.num_users;
  std::vector<std::vector<float>> out(users);
  for (auto& o : out) o.reserve(duration);

  const std::vector<float> silence(block, 0.0f);
  const std::vector<std::span<const float>> live(users, std::span<const float>(silence));

  SessionState s = state;
  for (std::size_t done = 0; done < duration;) {
    const std::size_t n = std::min(block, duration - done);
    MixFrame f = mix_tick(s, loops, live, n);
    for (std::size_t u = 0; u < users; ++u)
      out[u].insert(out[u].end(), f.outputs[u].begin(), f.outputs[u].end());
    s.playhead = f.playhead;
    done += n;
  }
  return out;
}

void AudioPlane::open_capture(TrackIndex track, SampleIndex started_at, SampleIndex start_phase) {
  CaptureBuffer cap;
  cap.started_at = started_at;
  cap.start_phase = start_phase;
  captures_[track] = std::move(cap);
}

std::optional<CaptureBuffer> AudioPlane::take_capture(TrackIndex track) {
  auto it = captures_.find(track);
  if (it == captures_.end()) return std::nullopt;
  CaptureBuffer cap = std::move(it->second);
  captures_.erase(it);
  return cap;
}

void AudioPlane::rebase_captures(SampleIndex epoch, SampleIndex master_len) {
  for (auto& [track, cap] : captures_) {
    // (started_at - epoch) mod L, for started_at on either side of epoch.
    const SampleIndex offset = cap.started_at >= epoch
                                   ? (cap.started_at - epoch) % master_len
                                   : (master_len - (epoch - cap.started_at) % master_len) % master_len;
    cap.start_phase = offset;
  }
}

void AudioPlane::capture_block(const SessionState& state, std::span<const std::span<const float>> live,
                               std::size_t frames) {
  const bool advancing = !state.master_len || state.transport == Transport::playing;
  if (!advancing) return;
  for (auto& [track, cap] : captures_) {
    if (track >= state.tracks.size()) continue;
    const std::size_t u = state.tracks[track].owner - 1;
    if (u < live.size() && live[u].size() >= frames) {
      capture_append(cap, live[u].first(frames));
    } else {
      cap.samples.resize(cap.samples.size() + frames, 0.0f);
    }
  }
}

void AudioPlane::store(LoopId id, LoopBuffer loop) {
  loops_[id] = std::make_shared<const LoopBuffer>(std::move(loop));
}

void AudioPlane::retain_referenced(const SessionState& state) {
  for (auto it = loops_.begin(); it != loops_.end();) {
    const bool used = std::any_of(state.tracks.begin(), state.tracks.end(),
                                  [&](const TrackState& t) { return t.content == it->first; });
    it = used ? std::next(it) : loops_.erase(it);
  }
}

void AudioPlane::clear() {
  captures_.clear();
  loops_.clear();
}

}  // namespace mrdaw
