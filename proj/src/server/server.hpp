#pragma once

// The live service: OSC control over UDP, OSC state broadcast, and a
// WebSocket/HTTP bridge for the browser panel, around one Engine.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "session.hpp"

namespace mrdaw {

enum class BackendKind { mock, osc_out };
enum class InputKind { silence, synthetic };

struct ServerConfig {
  SessionConfig session;
  std::string bind_address = "0.0.0.0";
  std::uint16_t osc_port = 9000;        // 0 picks a free port
  std::uint16_t broadcast_port = 9001;  // 0 replies to each client's source port
  std::uint16_t ws_port = 9002;         // 0 picks a free port
  BackendKind backend = BackendKind::mock;
  std::string osc_out_target;        // host:port, required for osc_out
  std::filesystem::path export_dir;  // empty: no export on shutdown
  std::filesystem::path web_root;    // empty: no static files
  InputKind input = InputKind::silence;
  std::size_t block_size = 256;
  std::chrono::milliseconds broadcast_interval{50};
  std::uint32_t snapshot_redundancy = 1;
  std::chrono::milliseconds stale_after{10000};

  // Throws Error(invalid_argument).
  void validate() const;
};

struct ServerStats {
  std::uint64_t osc_packets = 0;
  std::uint64_t osc_malformed = 0;
  std::uint64_t osc_unknown = 0;  // decoded but outside the address map
  std::uint64_t ws_messages = 0;
  std::uint64_t ws_rejected = 0;
  std::uint64_t events_applied = 0;
  std::uint64_t events_rejected = 0;
  std::uint64_t snapshots = 0;  // published, one seq each
  std::uint64_t seq = 0;
  std::uint64_t osc_clients = 0;
  std::uint64_t ws_clients = 0;
  std::uint64_t clients_expired = 0;
};

// Parses "host:port". Throws Error(invalid_argument).
std::pair<std::string, std::uint16_t> parse_host_port(const std::string& text);

// Reads MRDAW_LOG (trace|debug|info|warn|error|off) once per process.
void configure_logging();

class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds every socket and starts the I/O and engine threads. Throws
  // Error(bind) when a port is unavailable.
  void start();
  // Idempotent. Joins the threads and runs the export, if configured.
  void stop();
  bool running() const;

  std::uint16_t osc_port() const;
  std::uint16_t ws_port() const;
  ServerStats stats() const;
  // Paths written by the shutdown export; empty before stop().
  std::vector<std::filesystem::path> exported() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace mrdaw
