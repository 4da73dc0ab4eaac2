#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "session.hpp"

namespace mrdaw {

enum class ClientKind { osc, websocket };

const char* to_string(ClientKind k);

struct ClientEntry {
  UserId user = 0;
  ClientKind kind = ClientKind::osc;
  std::string address;           // OSC: source IP
  std::uint16_t port = 0;        // OSC: source port
  std::uint64_t connection = 0;  // WebSocket: connection id
  std::chrono::steady_clock::time_point last_seen{};

  bool same_peer(const ClientEntry& other) const {
    return kind == other.kind && address == other.address && port == other.port &&
           connection == other.connection;
  }
};

// At most one client per (user, kind). Time is supplied by the caller.
class ClientRegistry {
 public:
  using time_point = std::chrono::steady_clock::time_point;

  explicit ClientRegistry(std::chrono::milliseconds stale_after = std::chrono::seconds(10))
      : stale_after_(stale_after) {}

  // Registers or refreshes `entry`. Returns the entry it displaced when a
  // different peer held the same (user, kind).
  std::optional<ClientEntry> upsert(const ClientEntry& entry);

  // Refreshes last_seen if `peer` is the registered client for its slot.
  bool touch(const ClientEntry& peer, time_point now);

  // Drops the client registered under a WebSocket connection id, if any.
  std::optional<ClientEntry> remove_connection(std::uint64_t connection);

  // Drops and returns clients not seen within stale_after of `now`.
  std::vector<ClientEntry> expire(time_point now);

  const ClientEntry* find(UserId user, ClientKind kind) const;
  std::vector<ClientEntry> clients(ClientKind kind) const;
  std::size_t size() const { return entries_.size(); }
  std::chrono::milliseconds stale_after() const { return stale_after_; }

 private:
  std::chrono::milliseconds stale_after_;
  std::vector<ClientEntry> entries_;
};

}  // namespace mrdaw
