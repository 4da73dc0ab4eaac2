#include "mrdaw/mrdaw.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "engine.hpp"
#include "error.hpp"
#include "server.hpp"
#include "sim.hpp"
#include "snapshot.hpp"
#include "wav.hpp"

struct mrdaw_session {
  explicit mrdaw_session(mrdaw::SessionConfig c, std::size_t block) : engine(std::move(c), block) {}
  mrdaw::Engine engine;
};

struct mrdaw_sim_report {
  mrdaw::sim::SimReport report;
  std::string json;
};

struct mrdaw_server {
  explicit mrdaw_server(mrdaw::ServerConfig c) : server(std::move(c)) {}
  mrdaw::Server server;
  bool started = false;
};

namespace {

thread_local std::string last_error;

mrdaw_status fail(mrdaw_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

mrdaw_status from_errc(mrdaw::Errc e) {
  switch (e) {
    case mrdaw::Errc::invalid_argument: return MRDAW_ERR_INVALID_ARGUMENT;
    case mrdaw::Errc::empty_capture: return MRDAW_ERR_EMPTY_CAPTURE;
    case mrdaw::Errc::no_loops: return MRDAW_ERR_NO_LOOPS;
    case mrdaw::Errc::decode:
    case mrdaw::Errc::parse: return MRDAW_ERR_PARSE;
    case mrdaw::Errc::io: return MRDAW_ERR_IO;
    case mrdaw::Errc::bind: return MRDAW_ERR_BIND;
  }
  return MRDAW_ERR_INTERNAL;
}

// Runs `f`, translating exceptions into status codes. Nothing escapes.
template <class F>
mrdaw_status guarded(F&& f) noexcept {
  try {
    last_error.clear();
    return f();
  } catch (const mrdaw::Error& e) {
    return fail(from_errc(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MRDAW_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MRDAW_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MRDAW_ERR_INTERNAL, "unknown error");
  }
}

mrdaw::SessionConfig to_config(const mrdaw_session_config* c) {
  mrdaw::SessionConfig out;
  if (!c) return out;
  out.num_users = c->num_users;
  out.tracks_per_user = c->tracks_per_user;
  out.sample_rate = c->sample_rate;
  out.talk_gain = c->talk_gain;
  if (c->n_track_gains) {
    if (!c->track_gains) throw mrdaw::Error(mrdaw::Errc::invalid_argument, "track_gains is NULL");
    out.track_gain.assign(c->track_gains, c->track_gains + c->n_track_gains);
  }
  out.validate();
  return out;
}

mrdaw::EventKind to_kind(mrdaw_event e) {
  switch (e) {
    case MRDAW_EVENT_RECORD: return mrdaw::EventKind::record_toggle;
    case MRDAW_EVENT_PLAY: return mrdaw::EventKind::play_all;
    case MRDAW_EVENT_STOP: return mrdaw::EventKind::stop_all;
    case MRDAW_EVENT_TOGGLE: return mrdaw::EventKind::track_toggle;
  }
  throw mrdaw::Error(mrdaw::Errc::invalid_argument, "unknown event kind " + std::to_string(e));
}

#define MRDAW_REQUIRE(cond, what) \
  if (!(cond)) return fail(MRDAW_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* mrdaw_status_string(mrdaw_status status) {
  switch (status) {
    case MRDAW_OK: return "ok";
    case MRDAW_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MRDAW_ERR_REJECTED: return "event rejected";
    case MRDAW_ERR_EMPTY_CAPTURE: return "empty capture";
    case MRDAW_ERR_NO_LOOPS: return "no loops recorded";
    case MRDAW_ERR_PARSE: return "parse error";
    case MRDAW_ERR_IO: return "I/O error";
    case MRDAW_ERR_BIND: return "cannot bind port";
    case MRDAW_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case MRDAW_ERR_STATE: return "invalid state";
    case MRDAW_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mrdaw_last_error(void) { return last_error.c_str(); }

const char* mrdaw_version(void) { return "0.1.0"; }

void mrdaw_session_config_default(mrdaw_session_config* config) {
  if (!config) return;
  const mrdaw::SessionConfig d;
  *config = {d.num_users, d.tracks_per_user, d.sample_rate, d.talk_gain, nullptr, 0};
}

// ---- session ----------------------------------------------------------------

mrdaw_status mrdaw_session_create(const mrdaw_session_config* config, size_t block_size,
                                  mrdaw_session** out) {
  MRDAW_REQUIRE(out, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new mrdaw_session(to_config(config), block_size ? block_size : mrdaw::kDefaultBlockSize);
    return MRDAW_OK;
  });
}

void mrdaw_session_destroy(mrdaw_session* session) { delete session; }

mrdaw_status mrdaw_session_event(mrdaw_session* session, uint32_t user, mrdaw_event event, uint32_t track) {
  MRDAW_REQUIRE(session, "session is NULL");
  return guarded([&] {
    const auto r = session->engine.submit(user, to_kind(event), track);
    session->engine.take_diagnostics();
    if (!r.accepted()) return fail(MRDAW_ERR_REJECTED, *r.rejection);
    return MRDAW_OK;
  });
}

mrdaw_status mrdaw_session_process(mrdaw_session* session, const float* const* live, float* const* out,
                                   size_t frames) {
  MRDAW_REQUIRE(session, "session is NULL");
  return guarded([&] {
    const std::size_t users = session->engine.state().config.num_users;
    std::vector<std::span<const float>> in(users);
    std::vector<std::span<float>> mix;
    for (std::size_t u = 0; u < users; ++u)
      if (live && live[u]) in[u] = {live[u], frames};
    if (out) {
      mix.resize(users);
      for (std::size_t u = 0; u < users; ++u) {
        if (!out[u]) throw mrdaw::Error(mrdaw::Errc::invalid_argument, "output buffer is NULL");
        mix[u] = {out[u], frames};
      }
    }
    session->engine.process(in, mix, frames);
    session->engine.take_diagnostics();
    return MRDAW_OK;
  });
}

uint64_t mrdaw_session_now(const mrdaw_session* session) { return session ? session->engine.now() : 0; }

uint32_t mrdaw_session_track_count(const mrdaw_session* session) {
  return session ? session->engine.state().config.total_tracks() : 0;
}

mrdaw_status mrdaw_session_track_state(const mrdaw_session* session, uint32_t track, mrdaw_track_state* out) {
  MRDAW_REQUIRE(session && out, "NULL argument");
  const auto& tracks = session->engine.state().tracks;
  MRDAW_REQUIRE(track < tracks.size(), "track out of range");
  switch (tracks[track].variant) {
    case mrdaw::TrackVariant::empty: *out = MRDAW_TRACK_EMPTY; break;
    case mrdaw::TrackVariant::recording: *out = MRDAW_TRACK_RECORDING; break;
    case mrdaw::TrackVariant::playing: *out = MRDAW_TRACK_PLAYING; break;
    case mrdaw::TrackVariant::muted: *out = MRDAW_TRACK_MUTED; break;
  }
  return MRDAW_OK;
}

uint64_t mrdaw_session_master_len(const mrdaw_session* session) {
  return session ? session->engine.state().master_len.value_or(0) : 0;
}

uint64_t mrdaw_session_playhead(const mrdaw_session* session) {
  return session ? session->engine.state().playhead : 0;
}

int mrdaw_session_playing(const mrdaw_session* session) {
  return session && session->engine.state().transport == mrdaw::Transport::playing;
}

mrdaw_status mrdaw_session_cursor(const mrdaw_session* session, uint32_t user, uint32_t* out) {
  MRDAW_REQUIRE(session && out, "NULL argument");
  const auto& s = session->engine.state();
  MRDAW_REQUIRE(mrdaw::is_valid_user(s.config, user), "unknown user");
  *out = static_cast<uint32_t>(s.cursors[user - 1]);
  return MRDAW_OK;
}

mrdaw_status mrdaw_session_snapshot_json(const mrdaw_session* session, uint64_t seq, char* buffer,
                                         size_t capacity, size_t* needed) {
  MRDAW_REQUIRE(session, "session is NULL");
  return guarded([&] {
    const std::string text =
        mrdaw::panel_state_message(mrdaw::make_view(session->engine.state()), seq).dump();
    if (needed) *needed = text.size() + 1;
    if (!buffer || capacity < text.size() + 1) {
      if (buffer && capacity) buffer[0] = '\0';
      return fail(MRDAW_ERR_BUFFER_TOO_SMALL, "need " + std::to_string(text.size() + 1) + " bytes");
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return MRDAW_OK;
  });
}

mrdaw_status mrdaw_session_reset(mrdaw_session* session) {
  MRDAW_REQUIRE(session, "session is NULL");
  return guarded([&] {
    session->engine.reset();
    return MRDAW_OK;
  });
}

mrdaw_status mrdaw_session_export_wav(const mrdaw_session* session, const char* path_prefix) {
  MRDAW_REQUIRE(session && path_prefix, "NULL argument");
  return guarded([&] {
    mrdaw::export_wav(session->engine.state(), session->engine.audio().loops(), path_prefix);
    return MRDAW_OK;
  });
}

// ---- simulator --------------------------------------------------------------

mrdaw_status mrdaw_latency_preset(const char* name, mrdaw_latency* out) {
  MRDAW_REQUIRE(name && out, "NULL argument");
  const auto m = mrdaw::sim::latency_preset(name);
  if (!m) return fail(MRDAW_ERR_INVALID_ARGUMENT, std::string("unknown latency preset '") + name + "'");
  *out = {m->one_way_ms, m->jitter_ms, m->loss_pct, m->seed};
  return MRDAW_OK;
}

namespace {

mrdaw_status run_sim(const std::vector<mrdaw::sim::TraceEvent>& trace, const mrdaw_latency* latency,
                     const mrdaw_session_config* config, mrdaw_sim_report** out) {
  mrdaw::sim::LatencyModel model;
  if (latency) model = {latency->one_way_ms, latency->jitter_ms, latency->seed, latency->loss_pct};
  model.validate();
  mrdaw::sim::SimOptions options;
  options.config = to_config(config);
  auto r = std::make_unique<mrdaw_sim_report>();
  r->report = mrdaw::sim::simulate(trace, model, options);
  r->json = mrdaw::sim::report_to_json(r->report).dump(2) + "\n";
  *out = r.release();
  return MRDAW_OK;
}

}  // namespace

mrdaw_status mrdaw_sim_run_file(const char* trace_path, const mrdaw_latency* latency,
                                const mrdaw_session_config* config, mrdaw_sim_report** out) {
  MRDAW_REQUIRE(trace_path && out, "NULL argument");
  *out = nullptr;
  return guarded([&] { return run_sim(mrdaw::sim::load_trace(trace_path), latency, config, out); });
}

mrdaw_status mrdaw_sim_run_text(const char* trace_jsonl, const mrdaw_latency* latency,
                                const mrdaw_session_config* config, mrdaw_sim_report** out) {
  MRDAW_REQUIRE(trace_jsonl && out, "NULL argument");
  *out = nullptr;
  return guarded(
      [&] { return run_sim(mrdaw::sim::parse_trace(std::string_view(trace_jsonl)), latency, config, out); });
}

void mrdaw_sim_report_destroy(mrdaw_sim_report* report) { delete report; }

const char* mrdaw_sim_report_json(const mrdaw_sim_report* report) {
  return report ? report->json.c_str() : "";
}

size_t mrdaw_sim_violation_count(const mrdaw_sim_report* report) {
  return report ? report->report.violations.size() : 0;
}

const char* mrdaw_sim_violation(const mrdaw_sim_report* report, size_t index) {
  if (!report || index >= report->report.violations.size()) return nullptr;
  return report->report.violations[index].c_str();
}

const char* mrdaw_sim_audio_hash(const mrdaw_sim_report* report) {
  return report ? report->report.audio_hash.c_str() : "";
}

const char* mrdaw_sim_state_hash(const mrdaw_sim_report* report) {
  return report ? report->report.state_hash.c_str() : "";
}

mrdaw_status mrdaw_sim_write_wavs(const mrdaw_sim_report* report, const char* dir) {
  MRDAW_REQUIRE(report && dir, "NULL argument");
  return guarded([&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw mrdaw::Error(mrdaw::Errc::io, std::string("cannot create ") + dir + ": " + ec.message());
    const auto& r = report->report;
    for (std::size_t u = 0; u < r.audio.size(); ++u) {
      const auto path = std::filesystem::path(dir) / ("sim_u" + std::to_string(u + 1) + ".wav");
      mrdaw::write_file(path, mrdaw::encode_wav_float(r.audio[u], r.sample_rate));
    }
    return MRDAW_OK;
  });
}

// ---- server -----------------------------------------------------------------

void mrdaw_server_config_default(mrdaw_server_config* config) {
  if (!config) return;
  const mrdaw::ServerConfig d;
  *config = {};
  mrdaw_session_config_default(&config->session);
  config->osc_port = d.osc_port;
  config->broadcast_port = d.broadcast_port;
  config->ws_port = d.ws_port;
  config->backend = MRDAW_BACKEND_MOCK;
}

mrdaw_status mrdaw_server_create(const mrdaw_server_config* config, mrdaw_server** out) {
  MRDAW_REQUIRE(config && out, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    mrdaw::ServerConfig c;
    c.session = to_config(&config->session);
    if (config->bind_address) c.bind_address = config->bind_address;
    c.osc_port = config->osc_port;
    c.broadcast_port = config->broadcast_port;
    c.ws_port = config->ws_port;
    switch (config->backend) {
      case MRDAW_BACKEND_MOCK: c.backend = mrdaw::BackendKind::mock; break;
      case MRDAW_BACKEND_OSC_OUT: c.backend = mrdaw::BackendKind::osc_out; break;
      default: throw mrdaw::Error(mrdaw::Errc::invalid_argument, "unknown backend");
    }
    if (config->osc_out_target) c.osc_out_target = config->osc_out_target;
    if (config->export_dir) c.export_dir = config->export_dir;
    if (config->web_root) c.web_root = config->web_root;
    c.input = config->synthetic_input ? mrdaw::InputKind::synthetic : mrdaw::InputKind::silence;
    c.validate();
    *out = new mrdaw_server(std::move(c));
    return MRDAW_OK;
  });
}

mrdaw_status mrdaw_server_start(mrdaw_server* server) {
  MRDAW_REQUIRE(server, "server is NULL");
  if (server->started) return fail(MRDAW_ERR_STATE, "server already started");
  return guarded([&] {
    server->server.start();
    server->started = true;
    return MRDAW_OK;
  });
}

mrdaw_status mrdaw_server_stop(mrdaw_server* server) {
  MRDAW_REQUIRE(server, "server is NULL");
  return guarded([&] {
    server->server.stop();
    return MRDAW_OK;
  });
}

uint16_t mrdaw_server_osc_port(const mrdaw_server* server) { return server ? server->server.osc_port() : 0; }

uint16_t mrdaw_server_ws_port(const mrdaw_server* server) { return server ? server->server.ws_port() : 0; }

mrdaw_status mrdaw_server_stats_get(const mrdaw_server* server, mrdaw_server_stats* out) {
  MRDAW_REQUIRE(server && out, "NULL argument");
  const auto s = server->server.stats();
  *out = {s.osc_packets,    s.osc_malformed,   s.osc_unknown, s.ws_messages, s.ws_rejected,
          s.events_applied, s.events_rejected, s.snapshots,   s.osc_clients, s.ws_clients};
  return MRDAW_OK;
}

void mrdaw_server_destroy(mrdaw_server* server) { delete server; }

}  // extern "C"
