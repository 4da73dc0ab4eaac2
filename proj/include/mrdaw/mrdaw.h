#ifndef MRDAW_MRDAW_H
#define MRDAW_MRDAW_H

/*
 * C interface to the mrdaw loop-session engine, simulator and server.
 *
 * Handles are opaque and owned by the caller until passed to the matching
 * *_destroy function. Functions returning mrdaw_status report failures with a
 * code; mrdaw_last_error() returns the message for the most recent failure on
 * the calling thread. Strings returned by the library stay valid until the
 * owning handle is destroyed or the call is repeated.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MRDAW_BUILDING)
#define MRDAW_API __declspec(dllexport)
#else
#define MRDAW_API __declspec(dllimport)
#endif
#else
#define MRDAW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrdaw_status {
  MRDAW_OK = 0,
  MRDAW_ERR_INVALID_ARGUMENT = 1,
  MRDAW_ERR_REJECTED = 2, /* event not applicable in the current state */
  MRDAW_ERR_EMPTY_CAPTURE = 3,
  MRDAW_ERR_NO_LOOPS = 4,
  MRDAW_ERR_PARSE = 5,
  MRDAW_ERR_IO = 6,
  MRDAW_ERR_BIND = 7,
  MRDAW_ERR_BUFFER_TOO_SMALL = 8,
  MRDAW_ERR_STATE = 9, /* e.g. starting a server twice */
  MRDAW_ERR_INTERNAL = 10
} mrdaw_status;

MRDAW_API const char* mrdaw_status_string(mrdaw_status status);
MRDAW_API const char* mrdaw_last_error(void);
MRDAW_API const char* mrdaw_version(void);

typedef enum mrdaw_event {
  MRDAW_EVENT_RECORD = 0,
  MRDAW_EVENT_PLAY = 1,
  MRDAW_EVENT_STOP = 2,
  MRDAW_EVENT_TOGGLE = 3
} mrdaw_event;

typedef enum mrdaw_track_state {
  MRDAW_TRACK_EMPTY = 0,
  MRDAW_TRACK_RECORDING = 1,
  MRDAW_TRACK_PLAYING = 2,
  MRDAW_TRACK_MUTED = 3
} mrdaw_track_state;

typedef struct mrdaw_session_config {
  uint32_t num_users;
  uint32_t tracks_per_user;
  uint32_t sample_rate;
  float talk_gain;
  const float* track_gains; /* optional, n_track_gains entries in [0, 1] */
  size_t n_track_gains;
} mrdaw_session_config;

MRDAW_API void mrdaw_session_config_default(mrdaw_session_config* config);

/* ---- session ----------------------------------------------------------- */

/* A session with its own sample clock. Users are numbered from 1; tracks
 * from 0, user u owning [(u-1)*tracks_per_user, u*tracks_per_user). */
typedef struct mrdaw_session mrdaw_session;

/* config may be NULL for defaults; block_size 0 selects 256. */
MRDAW_API mrdaw_status mrdaw_session_create(const mrdaw_session_config* config, size_t block_size,
                                            mrdaw_session** out);
MRDAW_API void mrdaw_session_destroy(mrdaw_session* session);

/* Applies an event at the current clock. `track` is used by TOGGLE only. */
MRDAW_API mrdaw_status mrdaw_session_event(mrdaw_session* session, uint32_t user, mrdaw_event event,
                                           uint32_t track);

/* Advances the clock by `frames`. live[u-1] is user u's input (NULL entries or
 * a NULL array mean silence); out[u-1] receives user u's mix when `out` is
 * not NULL. */
MRDAW_API mrdaw_status mrdaw_session_process(mrdaw_session* session, const float* const* live,
                                             float* const* out, size_t frames);

MRDAW_API uint64_t mrdaw_session_now(const mrdaw_session* session);
MRDAW_API uint32_t mrdaw_session_track_count(const mrdaw_session* session);
MRDAW_API mrdaw_status mrdaw_session_track_state(const mrdaw_session* session, uint32_t track,
                                                 mrdaw_track_state* out);
/* 0 while no loop has been recorded. */
MRDAW_API uint64_t mrdaw_session_master_len(const mrdaw_session* session);
MRDAW_API uint64_t mrdaw_session_playhead(const mrdaw_session* session);
MRDAW_API int mrdaw_session_playing(const mrdaw_session* session);
/* The track the user's next take goes to. */
MRDAW_API mrdaw_status mrdaw_session_cursor(const mrdaw_session* session, uint32_t user, uint32_t* out);

/* Panel "state" message for the session. Writes at most `capacity` bytes
 * including the terminating NUL; `needed` (optional) receives the full size.
 * Returns MRDAW_ERR_BUFFER_TOO_SMALL if it did not fit. */
MRDAW_API mrdaw_status mrdaw_session_snapshot_json(const mrdaw_session* session, uint64_t seq, char* buffer,
                                                   size_t capacity, size_t* needed);

MRDAW_API mrdaw_status mrdaw_session_reset(mrdaw_session* session);

/* Writes <prefix>_u<N>.wav (32-bit float mono, one loop period) per user. */
MRDAW_API mrdaw_status mrdaw_session_export_wav(const mrdaw_session* session, const char* path_prefix);

/* ---- simulator --------------------------------------------------------- */

typedef struct mrdaw_latency {
  double one_way_ms;
  double jitter_ms;
  double loss_pct;
  uint64_t seed;
} mrdaw_latency;

/* local, metro, continental, 1000km-fiber */
MRDAW_API mrdaw_status mrdaw_latency_preset(const char* name, mrdaw_latency* out);

typedef struct mrdaw_sim_report mrdaw_sim_report;

/* Replays a JSON Lines trace. `config` may be NULL for defaults. */
MRDAW_API mrdaw_status mrdaw_sim_run_file(const char* trace_path, const mrdaw_latency* latency,
                                          const mrdaw_session_config* config, mrdaw_sim_report** out);
MRDAW_API mrdaw_status mrdaw_sim_run_text(const char* trace_jsonl, const mrdaw_latency* latency,
                                          const mrdaw_session_config* config, mrdaw_sim_report** out);
MRDAW_API void mrdaw_sim_report_destroy(mrdaw_sim_report* report);

/* Deterministic JSON for the whole run, pretty-printed with 2-space indent. */
MRDAW_API const char* mrdaw_sim_report_json(const mrdaw_sim_report* report);
MRDAW_API size_t mrdaw_sim_violation_count(const mrdaw_sim_report* report);
MRDAW_API const char* mrdaw_sim_violation(const mrdaw_sim_report* report, size_t index);
MRDAW_API const char* mrdaw_sim_audio_hash(const mrdaw_sim_report* report);
MRDAW_API const char* mrdaw_sim_state_hash(const mrdaw_sim_report* report);
/* Writes <dir>/sim_u<N>.wav with each user's output for the whole run. */
MRDAW_API mrdaw_status mrdaw_sim_write_wavs(const mrdaw_sim_report* report, const char* dir);

/* ---- server ------------------------------------------------------------ */

typedef enum mrdaw_backend { MRDAW_BACKEND_MOCK = 0, MRDAW_BACKEND_OSC_OUT = 1 } mrdaw_backend;

typedef struct mrdaw_server_config {
  mrdaw_session_config session;
  const char* bind_address; /* NULL: 0.0.0.0 */
  uint16_t osc_port;        /* 0: any free port */
  uint16_t broadcast_port;  /* 0: reply to each client's source port */
  uint16_t ws_port;         /* 0: any free port */
  mrdaw_backend backend;
  const char* osc_out_target; /* host:port, for MRDAW_BACKEND_OSC_OUT */
  const char* export_dir;     /* NULL: no export on stop */
  const char* web_root;       /* NULL: no static files */
  int synthetic_input;        /* nonzero: built-in test signal instead of silence */
} mrdaw_server_config;

typedef struct mrdaw_server_stats {
  uint64_t osc_packets;
  uint64_t osc_malformed;
  uint64_t osc_unknown;
  uint64_t ws_messages;
  uint64_t ws_rejected;
  uint64_t events_applied;
  uint64_t events_rejected;
  uint64_t snapshots;
  uint64_t osc_clients;
  uint64_t ws_clients;
} mrdaw_server_stats;

typedef struct mrdaw_server mrdaw_server;

MRDAW_API void mrdaw_server_config_default(mrdaw_server_config* config);
MRDAW_API mrdaw_status mrdaw_server_create(const mrdaw_server_config* config, mrdaw_server** out);
MRDAW_API mrdaw_status mrdaw_server_start(mrdaw_server* server);
/* Stops the service and runs the export, if configured. Idempotent. */
MRDAW_API mrdaw_status mrdaw_server_stop(mrdaw_server* server);
MRDAW_API uint16_t mrdaw_server_osc_port(const mrdaw_server* server);
MRDAW_API uint16_t mrdaw_server_ws_port(const mrdaw_server* server);
MRDAW_API mrdaw_status mrdaw_server_stats_get(const mrdaw_server* server, mrdaw_server_stats* out);
MRDAW_API void mrdaw_server_destroy(mrdaw_server* server);

#ifdef __cplusplus
}
#endif

#endif /* MRDAW_MRDAW_H */
