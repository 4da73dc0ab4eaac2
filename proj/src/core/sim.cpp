#include "sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <variant>

#include "engine.hpp"
#include "error.hpp"
#include "wav.hpp"

namespace mrdaw::sim {

using nlohmann::json;

// --- traces ------------------------------------------------------------------

namespace {

TraceEvent parse_trace_line(const std::string& line) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("not a JSON object");

  TraceEvent ev;
  const auto t = j.find("t_ms");
  if (t == j.end() || !t->is_number()) throw std::invalid_argument("'t_ms' must be a number");
  ev.t_ms = t->get<double>();
  if (!std::isfinite(ev.t_ms) || ev.t_ms < 0) throw std::invalid_argument("'t_ms' must be >= 0");

  const auto user = j.find("user");
  if (user == j.end() || !user->is_number_unsigned() || user->get<std::uint64_t>() > 0xffffffffu)
    throw std::invalid_argument("'user' must be a positive integer");
  ev.user = user->get<UserId>();

  const auto event = j.find("event");
  if (event == j.end() || !event->is_string()) throw std::invalid_argument("'event' must be a string");
  const auto kind = parse_event_kind(event->get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event " + event->dump());
  ev.kind = *kind;

  if (ev.kind == EventKind::track_toggle) {
    const auto track = j.find("track");
    if (track == j.end() || !track->is_number_unsigned() || track->get<std::uint64_t>() > 0xffffffffu)
      throw std::invalid_argument("'toggle' needs a non-negative integer 'track'");
    ev.track = track->get<TrackIndex>();
  }
  return ev;
}

}  // namespace

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      TraceEvent ev = parse_trace_line(line);
      if (!out.empty() && ev.t_ms < out.back().t_ms) throw std::invalid_argument("t_ms goes backwards");
      out.push_back(ev);
    } catch (const std::exception& e) {
      throw Error(Errc::parse, "trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TraceEvent> parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open trace " + path);
  return parse_trace(in);
}

std::string format_trace(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const TraceEvent& ev : trace) {
    json j = {{"t_ms", ev.t_ms}, {"user", ev.user}, {"event", to_string(ev.kind)}};
    if (ev.kind == EventKind::track_toggle) j["track"] = ev.track;
    out += j.dump();
    out += '\n';
  }
  return out;
}

// --- latency model -----------------------------------------------------------

void LatencyModel::validate() const {
  auto bad = [](double v) { return !std::isfinite(v) || v < 0; };
  if (bad(one_way_ms)) throw Error(Errc::invalid_argument, "one-way delay must be >= 0");
  if (bad(jitter_ms)) throw Error(Errc::invalid_argument, "jitter must be >= 0");
  if (bad(loss_pct) || loss_pct > 100) throw Error(Errc::invalid_argument, "loss must be in [0,100]");
}

std::optional<LatencyModel> latency_preset(std::string_view name) {
  if (name == "local") return LatencyModel{0.0, 0.0, 0, 0.0};
  if (name == "metro") return LatencyModel{5.0, 0.0, 0, 0.0};
  if (name == "continental") return LatencyModel{15.0, 0.0, 0, 0.0};
  if (name == "1000km-fiber") return LatencyModel{10.0, 0.0, 0, 0.0};
  return std::nullopt;
}

float synthetic_input(UserId user, SampleIndex n) {
  // Sawtooth with a per-user period; integer phase keeps it bit-exact everywhere.
  const std::uint64_t period = 200 + 37 * std::uint64_t{user};
  const auto phase = static_cast<float>(n % period);
  return 0.1f * (2.0f * phase / static_cast<float>(period) - 1.0f);
}

// --- simulation --------------------------------------------------------------

namespace {

class Network {
 public:
  Network(const LatencyModel& model, std::uint32_t sample_rate)
      : model_(model), sample_rate_(sample_rate), rng_(model.seed) {}

  SampleIndex delay() {
    const double u = uniform();
    const double ms = std::max(0.0, model_.one_way_ms + model_.jitter_ms * (2.0 * u - 1.0));
    return static_cast<SampleIndex>(std::llround(ms * sample_rate_ / 1000.0));
  }

  bool lost() { return uniform() * 100.0 < model_.loss_pct; }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  LatencyModel model_;
  std::uint32_t sample_rate_;
  std::mt19937_64 rng_;
};

struct Arrival {
  std::size_t trace_index;
};
struct Periodic {};
struct Delivery {
  std::size_t client;
  std::uint64_t seq;
  std::size_t view;
};

struct Pending {
  SampleIndex t;
  std::uint64_t order;
  std::variant<Arrival, Periodic, Delivery> what;

  bool operator>(const Pending& o) const { return t != o.t ? t > o.t : order > o.order; }
};

struct ClientState {
  std::uint64_t seq = 0;
  std::optional<std::size_t> view;
  std::vector<std::pair<SampleIndex, std::size_t>> history;  // (time, view id)
  ClientReport report;
};

SampleIndex to_samples(double ms, std::uint32_t sample_rate) {
  return static_cast<SampleIndex>(std::llround(ms * sample_rate / 1000.0));
}

double to_ms(SampleIndex t, std::uint32_t sample_rate) {
  return static_cast<double>(t) * 1000.0 / sample_rate;
}

std::string hash_audio(const std::vector<std::vector<float>>& audio) {
  std::vector<std::uint8_t> bytes;
  std::size_t total = 0;
  for (const auto& a : audio) total += a.size();
  bytes.reserve(total * 4);
  for (const auto& a : audio)
    for (float s : a) {
      const auto v = std::bit_cast<std::uint32_t>(s);
      for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  return sha256_hex(bytes);
}

json state_to_json(const SessionState& s) {
  json tracks = json::array();
  for (const TrackState& t : s.tracks) {
    json jt = {{"variant", to_string(t.variant)}, {"owner", t.owner}};
    if (t.variant == TrackVariant::recording) jt["started_at"] = t.started_at;
    if (t.content) jt["content"] = *t.content;
    tracks.push_back(std::move(jt));
  }
  json j = {{"transport", s.transport == Transport::playing ? "playing" : "stopped"},
            {"playhead", s.playhead},
            {"epoch", s.epoch},
            {"tracks", std::move(tracks)},
            {"cursors", s.cursors}};
  j["master_len"] = s.master_len ? json(*s.master_len) : json(nullptr);
  return j;
}

}  // namespace

SimReport simulate(const std::vector<TraceEvent>& trace, const LatencyModel& model,
                   const SimOptions& options) {
  model.validate();
  if (!(options.broadcast_interval_ms > 0))
    throw Error(Errc::invalid_argument, "broadcast interval must be > 0");
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].t_ms < trace[i - 1].t_ms)
      throw Error(Errc::invalid_argument, "trace times must be non-decreasing");

  Engine engine(options.config, options.block_size);
  const std::uint32_t sr = engine.state().config.sample_rate;
  const std::size_t users = engine.state().config.num_users;

  SimReport report;
  report.model = model;
  report.config = engine.state().config;
  report.sample_rate = sr;
  report.trace_events = trace.size();
  report.last_event_ms = trace.empty() ? 0.0 : trace.back().t_ms;
  report.convergence_bound_ms = 2.0 * (model.one_way_ms + model.jitter_ms) + options.broadcast_interval_ms;

  const SampleIndex end =
      to_samples(report.last_event_ms + report.convergence_bound_ms + std::max(0.0, options.tail_ms), sr);
  const SampleIndex interval = std::max<SampleIndex>(1, to_samples(options.broadcast_interval_ms, sr));

  const std::uint32_t redundancy = std::max<std::uint32_t>(1, options.snapshot_redundancy);
  Network net(model, sr);
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t order = 0;
  auto schedule = [&](SampleIndex t, auto what) { queue.push(Pending{t, order++, what}); };

  for (std::size_t i = 0; i < trace.size(); ++i)
    schedule(to_samples(trace[i].t_ms, sr) + net.delay(), Arrival{i});
  schedule(0, Periodic{});

  std::vector<ClientState> clients(users);
  for (std::size_t c = 0; c < users; ++c) clients[c].report.user = static_cast<UserId>(c + 1);

  std::vector<SnapshotView> views;
  std::uint64_t seq = 0;
  auto broadcast = [&](SampleIndex t) {
    views.push_back(make_view(engine.state()));
    ++seq;
    report.broadcast_seqs.push_back(seq);
    for (std::size_t c = 0; c < users; ++c) {
      for (std::uint32_t copy = 0; copy < redundancy; ++copy) {
        if (net.lost()) {
          ++clients[c].report.snapshots_lost;
          continue;
        }
        schedule(t + net.delay(), Delivery{c, seq, views.size() - 1});
      }
    }
  };

  report.audio.assign(users, std::vector<float>(static_cast<std::size_t>(end), 0.0f));
  std::vector<std::vector<float>> live_buf(users);
  auto run_audio_to = [&](SampleIndex t) {
    constexpr std::size_t kChunk = 4096;
    while (engine.now() < t) {
      const SampleIndex from = engine.now();
      const auto n = static_cast<std::size_t>(std::min<SampleIndex>(kChunk, t - from));
      std::vector<std::span<const float>> live(users);
      std::vector<std::span<float>> out(users);
      for (std::size_t u = 0; u < users; ++u) {
        live_buf[u].resize(n);
        for (std::size_t k = 0; k < n; ++k)
          live_buf[u][k] = synthetic_input(static_cast<UserId>(u + 1), from + k);
        live[u] = live_buf[u];
        out[u] = std::span<float>(report.audio[u]).subspan(static_cast<std::size_t>(from), n);
      }
      engine.process(live, out, n);
    }
  };

  while (!queue.empty() && queue.top().t <= end) {
    const Pending p = queue.top();
    queue.pop();
    run_audio_to(p.t);

    if (auto* a = std::get_if<Arrival>(&p.what)) {
      const TraceEvent& ev = trace[a->trace_index];
      const SnapshotView before = make_view(engine.state());
      ApplyResult r = engine.submit(ev.user, ev.kind, ev.track);
      StepRecord step{p.t, ev.user, ev.kind, ev.track, r.accepted(), engine.state(), {}};
      for (const EffectCommand& fx : r.effects) {
        if (fx.kind != EffectKind::stop_capture_and_finalize) continue;
        const auto& content = engine.state().tracks[fx.track].content;
        auto it = content ? engine.audio().loops().find(*content) : engine.audio().loops().end();
        step.finalized_lengths.push_back(it != engine.audio().loops().end() ? it->second->length() : 0);
      }
      report.steps.push_back(std::move(step));
      if (make_view(engine.state()) != before) broadcast(p.t);
    } else if (std::holds_alternative<Periodic>(p.what)) {
      broadcast(p.t);
      if (p.t + interval <= end) schedule(p.t + interval, Periodic{});
    } else {
      const auto& d = std::get<Delivery>(p.what);
      ClientState& c = clients[d.client];
      if (d.seq > c.seq) {
        c.seq = d.seq;
        c.view = d.view;
        c.history.emplace_back(p.t, d.view);
        ++c.report.snapshots_received;
      } else {
        ++c.report.snapshots_stale;
      }
    }
  }
  run_audio_to(end);

  report.final_state = engine.state();
  report.final_view = make_view(engine.state());
  report.final_seq = seq;
  report.loops = engine.audio().loops();
  report.duration_ms = to_ms(end, sr);

  for (ClientState& c : clients) {
    ClientReport& cr = c.report;
    cr.view_seq = c.seq;
    if (c.view) cr.view = views[*c.view];
    // Earliest time from which the client held the final view for good.
    std::optional<SampleIndex> since;
    for (auto it = c.history.rbegin(); it != c.history.rend(); ++it) {
      if (views[it->second] != report.final_view) break;
      since = it->first;
    }
    cr.converged = since.has_value();
    if (since) cr.convergence_ms = std::max(0.0, to_ms(*since, sr) - report.last_event_ms);
    report.clients.push_back(cr);
  }

  report.audio_hash = hash_audio(report.audio);
  json st = {{"snapshot", view_to_json(report.final_view)}, {"state", state_to_json(report.final_state)}};
  report.state_hash = sha256_hex(st.dump());
  report.violations = check_invariants(report);
  return report;
}

// --- invariants --------------------------------------------------------------

namespace {

void check_state(const SessionState& s, std::vector<std::string>& fail, const std::string& where) {
  const SessionConfig& cfg = s.config;
  for (UserId u = 1; u <= cfg.num_users; ++u) {
    auto [first, last] = owned_tracks(cfg, u);
    int recording = 0;
    for (TrackIndex i = first; i < last; ++i) {
      const TrackState& t = s.tracks[i];
      if (t.owner != u) fail.push_back("track-ownership: track " + std::to_string(i) + where);
      if (t.variant == TrackVariant::recording) ++recording;
    }
    if (recording > 1) fail.push_back("single-recording-per-user: user " + std::to_string(u) + where);
    const TrackIndex cursor = s.cursors[u - 1];
    if (cursor < first || cursor >= last)
      fail.push_back("cursor-in-allocation: user " + std::to_string(u) + where);
  }
  for (TrackIndex i = 0; i < s.tracks.size(); ++i) {
    const TrackState& t = s.tracks[i];
    if (t.content.has_value() != t.filled())
      fail.push_back("content-iff-filled: track " + std::to_string(i) + where);
    if (t.filled() && !s.master_len)
      fail.push_back("filled-track-without-master-len: track " + std::to_string(i) + where);
  }
  if (s.master_len && s.transport == Transport::playing && s.playhead >= *s.master_len)
    fail.push_back("playhead-in-range" + where);
  if (!s.master_len && s.playhead != 0) fail.push_back("playhead-zero-without-loop" + where);
}

}  // namespace

std::vector<std::string> check_invariants(const SimReport& r) {
  std::vector<std::string> fail;
  std::optional<SampleIndex> master;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const StepRecord& step = r.steps[i];
    const std::string where = " (step " + std::to_string(i) + ")";
    check_state(step.state, fail, where);
    if (master && step.state.master_len != master) fail.push_back("master-len-write-once" + where);
    if (!master) master = step.state.master_len;
    for (SampleIndex len : step.finalized_lengths)
      if (!step.state.master_len || len != *step.state.master_len)
        fail.push_back("loop-length-equals-master" + where);
  }
  check_state(r.final_state, fail, " (final)");
  if (master && r.final_state.master_len != master) fail.push_back("master-len-write-once (final)");

  for (const TrackState& t : r.final_state.tracks) {
    if (!t.content) continue;
    auto it = r.loops.find(*t.content);
    if (it == r.loops.end() || !r.final_state.master_len || it->second->length() != *r.final_state.master_len)
      fail.push_back("loop-length-equals-master (final store)");
  }

  for (std::size_t i = 1; i < r.broadcast_seqs.size(); ++i)
    if (r.broadcast_seqs[i] <= r.broadcast_seqs[i - 1]) {
      fail.push_back("snapshot-seq-monotonic");
      break;
    }

  for (std::size_t u = 0; u < r.audio.size(); ++u) {
    const bool ok = std::all_of(r.audio[u].begin(), r.audio[u].end(),
                                [](float s) { return std::isfinite(s) && s >= -1.0f && s <= 1.0f; });
    if (!ok) fail.push_back("clamp-safety: user " + std::to_string(u + 1));
  }

  // Arrival times are rounded to whole samples; allow for that.
  const double slack_ms = 2000.0 / r.sample_rate;
  for (const ClientReport& c : r.clients) {
    if (!c.converged) {
      fail.push_back("client-convergence: user " + std::to_string(c.user));
      continue;
    }
    if (c.convergence_ms > r.convergence_bound_ms + slack_ms)
      fail.push_back("convergence-bound: user " + std::to_string(c.user));
  }
  return fail;
}

json discrete_signature(const SessionState& s) {
  json tracks = json::array();
  for (const TrackState& t : s.tracks)
    tracks.push_back({{"variant", to_string(t.variant)}, {"owner", t.owner}});
  return {{"transport", s.transport == Transport::playing ? "playing" : "stopped"},
          {"has_loop", s.master_len.has_value()},
          {"tracks", std::move(tracks)},
          {"cursors", s.cursors}};
}

json report_to_json(const SimReport& r) {
  json steps = json::array();
  for (const StepRecord& s : r.steps) {
    json j = {{"t", s.t}, {"user", s.user}, {"event", to_string(s.kind)}, {"accepted", s.accepted}};
    if (s.kind == EventKind::track_toggle) j["track"] = s.track;
    if (!s.finalized_lengths.empty()) j["finalized_lengths"] = s.finalized_lengths;
    steps.push_back(std::move(j));
  }
  json clients = json::array();
  for (const ClientReport& c : r.clients) {
    json j = {{"user", c.user},
              {"converged", c.converged},
              {"snapshots_received", c.snapshots_received},
              {"snapshots_lost", c.snapshots_lost},
              {"snapshots_stale", c.snapshots_stale},
              {"view_seq", c.view_seq}};
    j["convergence_ms"] = c.converged ? json(c.convergence_ms) : json(nullptr);
    clients.push_back(std::move(j));
  }
  json model = {{"one_way_ms", r.model.one_way_ms},
                {"jitter_ms", r.model.jitter_ms},
                {"seed", r.model.seed},
                {"loss_pct", r.model.loss_pct}};
  json config = {{"num_users", r.config.num_users},
                 {"tracks_per_user", r.config.tracks_per_user},
                 {"sample_rate", r.config.sample_rate},
                 {"talk_gain", r.config.talk_gain}};
  return {{"model", std::move(model)},
          {"config", std::move(config)},
          {"trace_events", r.trace_events},
          {"steps", std::move(steps)},
          {"final_snapshot", panel_state_message(r.final_view, r.final_seq)},
          {"final_state", state_to_json(r.final_state)},
          {"clients", std::move(clients)},
          {"last_event_ms", r.last_event_ms},
          {"convergence_bound_ms", r.convergence_bound_ms},
          {"duration_ms", r.duration_ms},
          {"audio_hash", r.audio_hash},
          {"state_hash", r.state_hash},
          {"violations", r.violations}};
}

}  // namespace mrdaw::sim
