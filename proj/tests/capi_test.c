/* Exercises the C API from C. */

#include <mrdaw/mrdaw.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                                      \
  do {                                                                                    \
    if (!(cond)) {                                                                        \
      fprintf(stderr, "%s:%d: expected %s (last error: %s)\n", __FILE__, __LINE__, #cond, \
              mrdaw_last_error());                                                        \
      ++failures;                                                                         \
    }                                                                                     \
  } while (0)

static void test_session(void) {
  mrdaw_session* s = NULL;
  mrdaw_session_config cfg;
  mrdaw_track_state st;
  uint32_t cursor = 99;
  char small[8];
  char* json;
  size_t needed = 0;
  float in1[1000], in2[1000], out1[1000], out2[1000];
  const float* live[2];
  float* out[2];
  int i;

  mrdaw_session_config_default(&cfg);
  EXPECT(cfg.num_users == 2 && cfg.tracks_per_user == 4 && cfg.sample_rate == 48000);
  cfg.num_users = 0;
  EXPECT(mrdaw_session_create(&cfg, 0, &s) == MRDAW_ERR_INVALID_ARGUMENT);
  EXPECT(s == NULL);
  EXPECT(strlen(mrdaw_last_error()) > 0);
  EXPECT(mrdaw_session_create(NULL, 0, NULL) == MRDAW_ERR_INVALID_ARGUMENT);

  cfg.num_users = 2;
  EXPECT(mrdaw_session_create(&cfg, 64, &s) == MRDAW_OK);
  EXPECT(mrdaw_session_track_count(s) == 8);
  EXPECT(mrdaw_session_export_wav(s, "/tmp/mrdaw_capi_empty") == MRDAW_ERR_NO_LOOPS);
  EXPECT(strcmp(mrdaw_last_error(), "no loops recorded") == 0);

  /* A stop before any time has passed is an empty take. */
  EXPECT(mrdaw_session_event(s, 1, MRDAW_EVENT_RECORD, 0) == MRDAW_OK);
  EXPECT(mrdaw_session_event(s, 1, MRDAW_EVENT_RECORD, 0) == MRDAW_ERR_REJECTED);
  EXPECT(mrdaw_session_event(s, 5, MRDAW_EVENT_PLAY, 0) == MRDAW_ERR_REJECTED);
  EXPECT(mrdaw_session_track_state(s, 0, &st) == MRDAW_OK && st == MRDAW_TRACK_RECORDING);

  for (i = 0; i < 1000; ++i) {
    in1[i] = 0.25f;
    in2[i] = -0.5f;
  }
  live[0] = in1;
  live[1] = in2;
  out[0] = out1;
  out[1] = out2;
  EXPECT(mrdaw_session_process(s, live, out, 1000) == MRDAW_OK);
  EXPECT(mrdaw_session_now(s) == 1000);
  /* Each user hears only the other's talkback. */
  EXPECT(out1[10] == -0.5f && out2[10] == 0.25f);

  EXPECT(mrdaw_session_event(s, 1, MRDAW_EVENT_RECORD, 0) == MRDAW_OK);
  EXPECT(mrdaw_session_master_len(s) == 1000);
  EXPECT(mrdaw_session_playing(s));
  EXPECT(mrdaw_session_cursor(s, 1, &cursor) == MRDAW_OK && cursor == 1);
  EXPECT(mrdaw_session_cursor(s, 3, &cursor) == MRDAW_ERR_INVALID_ARGUMENT);
  EXPECT(mrdaw_session_track_state(s, 0, &st) == MRDAW_OK && st == MRDAW_TRACK_PLAYING);
  EXPECT(mrdaw_session_track_state(s, 8, &st) == MRDAW_ERR_INVALID_ARGUMENT);

  EXPECT(mrdaw_session_process(s, NULL, out, 500) == MRDAW_OK);
  /* Loop content plays to both users; user 1's own talkback is silent now. */
  EXPECT(out1[0] == 0.25f && out2[0] == 0.25f);
  EXPECT(mrdaw_session_playhead(s) == 500);

  EXPECT(mrdaw_session_event(s, 2, MRDAW_EVENT_TOGGLE, 0) == MRDAW_OK);
  EXPECT(mrdaw_session_track_state(s, 0, &st) == MRDAW_OK && st == MRDAW_TRACK_MUTED);

  EXPECT(mrdaw_session_snapshot_json(s, 4, small, sizeof small, &needed) == MRDAW_ERR_BUFFER_TOO_SMALL);
  EXPECT(needed > sizeof small && small[0] == '\0');
  json = (char*)malloc(needed);
  EXPECT(mrdaw_session_snapshot_json(s, 4, json, needed, NULL) == MRDAW_OK);
  EXPECT(strstr(json, "\"type\":\"state\"") != NULL);
  EXPECT(strstr(json, "\"seq\":4") != NULL);
  EXPECT(strstr(json, "\"looplen\":1000") != NULL);
  free(json);

  EXPECT(mrdaw_session_export_wav(s, "/tmp/mrdaw_capi") == MRDAW_OK);
  {
    FILE* f = fopen("/tmp/mrdaw_capi_u2.wav", "rb");
    long size = -1;
    EXPECT(f != NULL);
    if (f) {
      fseek(f, 0, SEEK_END);
      size = ftell(f);
      fclose(f);
    }
    EXPECT(size == 56 + 4 * 1000);
    remove("/tmp/mrdaw_capi_u1.wav");
    remove("/tmp/mrdaw_capi_u2.wav");
  }

  EXPECT(mrdaw_session_reset(s) == MRDAW_OK);
  EXPECT(mrdaw_session_master_len(s) == 0);
  EXPECT(mrdaw_session_track_state(s, 0, &st) == MRDAW_OK && st == MRDAW_TRACK_EMPTY);
  mrdaw_session_destroy(s);
  mrdaw_session_destroy(NULL);
}

static void test_sim(void) {
  const char* trace =
      "{\"t_ms\":0,\"user\":1,\"event\":\"record\"}\n"
      "{\"t_ms\":1000,\"user\":1,\"event\":\"record\"}\n";
  mrdaw_latency lat;
  mrdaw_sim_report* a = NULL;
  mrdaw_sim_report* b = NULL;

  EXPECT(mrdaw_latency_preset("continental", &lat) == MRDAW_OK && lat.one_way_ms == 15.0);
  EXPECT(mrdaw_latency_preset("moon", &lat) == MRDAW_ERR_INVALID_ARGUMENT);
  lat.one_way_ms = 30;
  lat.jitter_ms = 5;
  lat.loss_pct = 10;
  lat.seed = 3;
  EXPECT(mrdaw_sim_run_text(trace, &lat, NULL, &a) == MRDAW_OK);
  EXPECT(mrdaw_sim_run_text(trace, &lat, NULL, &b) == MRDAW_OK);
  EXPECT(mrdaw_sim_violation_count(a) == 0);
  EXPECT(mrdaw_sim_violation(a, 0) == NULL);
  EXPECT(strcmp(mrdaw_sim_report_json(a), mrdaw_sim_report_json(b)) == 0);
  EXPECT(strlen(mrdaw_sim_audio_hash(a)) == 64);
  EXPECT(strcmp(mrdaw_sim_state_hash(a), mrdaw_sim_state_hash(b)) == 0);
  mrdaw_sim_report_destroy(a);
  mrdaw_sim_report_destroy(b);

  EXPECT(mrdaw_sim_run_text("{\"t_ms\":0}\n", &lat, NULL, &a) == MRDAW_ERR_PARSE);
  EXPECT(a == NULL);
  EXPECT(strstr(mrdaw_last_error(), "line 1") != NULL);
  EXPECT(mrdaw_sim_run_file("/nonexistent/trace.jsonl", &lat, NULL, &a) == MRDAW_ERR_IO);
  lat.loss_pct = 150;
  EXPECT(mrdaw_sim_run_text(trace, &lat, NULL, &a) == MRDAW_ERR_INVALID_ARGUMENT);
}

static void test_server(void) {
  mrdaw_server_config cfg;
  mrdaw_server* srv = NULL;
  mrdaw_server_stats stats;

  mrdaw_server_config_default(&cfg);
  EXPECT(cfg.osc_port == 9000 && cfg.broadcast_port == 9001 && cfg.ws_port == 9002);
  cfg.bind_address = "127.0.0.1";
  cfg.osc_port = 0;
  cfg.ws_port = 0;
  cfg.broadcast_port = 0;
  cfg.backend = MRDAW_BACKEND_OSC_OUT;
  EXPECT(mrdaw_server_create(&cfg, &srv) == MRDAW_ERR_INVALID_ARGUMENT);
  cfg.backend = MRDAW_BACKEND_MOCK;
  EXPECT(mrdaw_server_create(&cfg, &srv) == MRDAW_OK);
  EXPECT(mrdaw_server_start(srv) == MRDAW_OK);
  EXPECT(mrdaw_server_start(srv) == MRDAW_ERR_STATE);
  EXPECT(mrdaw_server_osc_port(srv) != 0);
  EXPECT(mrdaw_server_ws_port(srv) != 0);
  EXPECT(mrdaw_server_stats_get(srv, &stats) == MRDAW_OK && stats.osc_packets == 0);
  EXPECT(mrdaw_server_stop(srv) == MRDAW_OK);
  EXPECT(mrdaw_server_stop(srv) == MRDAW_OK);
  mrdaw_server_destroy(srv);
}

int main(void) {
  EXPECT(strcmp(mrdaw_status_string(MRDAW_OK), "ok") == 0);
  EXPECT(strcmp(mrdaw_status_string(MRDAW_ERR_NO_LOOPS), "no loops recorded") == 0);
  test_session();
  test_sim();
  test_server();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi_test: all checks passed\n");
  return 0;
}
