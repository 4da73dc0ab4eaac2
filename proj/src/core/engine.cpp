#include "engine.hpp"

#include "error.hpp"

namespace mrdaw {

Engine::Engine(SessionConfig config, std::size_t block_size)
    : state_(make_session(std::move(config))), block_size_(block_size), mock_(audio_) {
  if (block_size_ == 0) throw Error(Errc::invalid_argument, "block size must be > 0");
  mock_.bind(state_);
}

ApplyResult Engine::submit(UserId user, EventKind kind, TrackIndex track) {
  ApplyResult r = apply_event(state_, ControlEvent{now_, user, kind, track});
  if (!r.accepted()) {
    note("rejected " + std::string(to_string(kind)) + " from user " + std::to_string(user) + ": " +
         *r.rejection);
    return r;
  }
  state_ = r.state;
  mock_.bind(state_);
  DispatchReport local = dispatch(r.effects, mock_);
  for (auto& f : local.failures) note("mock backend: " + f);
  for (auto& d : mock_.take_diagnostics()) note(std::move(d));
  if (mirror_) {
    DispatchReport remote = dispatch(r.effects, *mirror_);
    for (auto& f : remote.failures) note("mirror backend: " + f);
  }
  audio_.retain_referenced(state_);
  return r;
}

void Engine::process(std::span<const std::span<const float>> live, std::span<const std::span<float>> out,
                     std::size_t frames) {
  const std::size_t users = state_.config.num_users;
  if (!out.empty() && out.size() < users)
    throw Error(Errc::invalid_argument, "need one output buffer per user");
  for (const auto& o : out)
    if (o.size() < frames) throw Error(Errc::invalid_argument, "output buffer too short");

  std::vector<std::span<const float>> chunk(live.size());
  for (std::size_t done = 0; done < frames;) {
    const std::size_t n = std::min(block_size_, frames - done);
    for (std::size_t v = 0; v < live.size(); ++v)
      chunk[v] = live[v].size() >= done + n ? live[v].subspan(done, n) : std::span<const float>{};

    audio_.capture_block(state_, chunk, n);
    MixFrame f = mix_tick(state_, audio_.loops(), chunk, n);
    state_.playhead = f.playhead;
    if (!live.empty())
      for (auto& d : f.diagnostics) note(std::move(d));
    if (!out.empty())
      for (std::size_t u = 0; u < users; ++u)
        std::copy(f.outputs[u].begin(), f.outputs[u].end(), out[u].begin() + done);
    done += n;
    now_ += n;
  }
}

void Engine::note(std::string diagnostic) {
  if (diagnostics_.size() < kMaxDiagnostics) diagnostics_.push_back(std::move(diagnostic));
}

void Engine::reset() {
  state_ = reset_session(state_);
  audio_.clear();
  mock_.reset();
  mock_.bind(state_);
}

}  // namespace mrdaw
