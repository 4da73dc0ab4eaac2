// mrdaw-server: the live loop-session service.

#include <mrdaw/mrdaw.h>
#include <pthread.h>

#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Collaborative loop-session server (OSC control, WebSocket panel)"};

  mrdaw_server_config cfg;
  mrdaw_server_config_default(&cfg);
  std::string bind = "0.0.0.0";
  std::string backend = "mock";
  std::string target, export_dir, web_root;
  bool synthetic = false;

  app.add_option("--osc-port", cfg.osc_port, "UDP port for OSC control")->capture_default_str();
  app.add_option("--broadcast-port", cfg.broadcast_port,
                 "UDP port on each client for state broadcasts (0: reply to the source port)")
      ->capture_default_str();
  app.add_option("--ws-port", cfg.ws_port, "HTTP/WebSocket port for the panel")->capture_default_str();
  app.add_option("--users", cfg.session.num_users, "Number of users")->capture_default_str();
  app.add_option("--tracks-per-user", cfg.session.tracks_per_user, "Tracks per user")->capture_default_str();
  app.add_option("--sample-rate", cfg.session.sample_rate, "Session sample rate in Hz")
      ->capture_default_str();
  app.add_option("--backend", backend, "DAW backend")
      ->check(CLI::IsMember({"mock", "osc-out"}))
      ->capture_default_str();
  app.add_option("--osc-out-target", target, "host:port receiving backend calls (osc-out)");
  app.add_option("--export-dir", export_dir, "Write one loop period per user here on shutdown");
  app.add_option("--web-root", web_root, "Directory served over HTTP on --ws-port")
      ->check(CLI::ExistingDirectory);
  app.add_option("--bind", bind, "Address to listen on")->capture_default_str();
  app.add_flag("--synthetic-input", synthetic, "Feed a test signal instead of silence");
  app.footer("Log level: MRDAW_LOG=trace|debug|info|warn|error|off");

  CLI11_PARSE(app, argc, argv);

  cfg.bind_address = bind.c_str();
  cfg.backend = backend == "osc-out" ? MRDAW_BACKEND_OSC_OUT : MRDAW_BACKEND_MOCK;
  if (!target.empty()) cfg.osc_out_target = target.c_str();
  if (!export_dir.empty()) cfg.export_dir = export_dir.c_str();
  if (!web_root.empty()) cfg.web_root = web_root.c_str();
  cfg.synthetic_input = synthetic;

  // Block the shutdown signals before any thread starts so they inherit the
  // mask and only sigwait below sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  mrdaw_server* server = nullptr;
  mrdaw_status st = mrdaw_server_create(&cfg, &server);
  if (st == MRDAW_OK) st = mrdaw_server_start(server);
  if (st != MRDAW_OK) {
    std::cerr << "mrdaw-server: " << mrdaw_status_string(st) << ": " << mrdaw_last_error() << "\n";
    mrdaw_server_destroy(server);
    return 1;
  }

  int sig = 0;
  sigwait(&signals, &sig);
  st = mrdaw_server_stop(server);
  mrdaw_server_destroy(server);
  return st == MRDAW_OK ? 0 : 1;
}
