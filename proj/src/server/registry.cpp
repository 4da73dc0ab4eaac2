#include "registry.hpp"

#include <algorithm>

namespace mrdaw {

const char* to_string(ClientKind k) { return k == ClientKind::osc ? "osc" : "websocket"; }

std::optional<ClientEntry> ClientRegistry::upsert(const ClientEntry& entry) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ClientEntry& e) { return e.user == entry.user && e.kind == entry.kind; });
  if (it == entries_.end()) {
    entries_.push_back(entry);
    return std::nullopt;
  }
  std::optional<ClientEntry> displaced;
  if (!it->same_peer(entry)) displaced = *it;
  *it = entry;
  return displaced;
}

bool ClientRegistry::touch(const ClientEntry& peer, time_point now) {
  for (auto& e : entries_) {
    if (e.user == peer.user && e.same_peer(peer)) {
      e.last_seen = std::max(e.last_seen, now);
      return true;
    }
  }
  return false;
}

std::optional<ClientEntry> ClientRegistry::remove_connection(std::uint64_t connection) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ClientEntry& e) {
    return e.kind == ClientKind::websocket && e.connection == connection;
  });
  if (it == entries_.end()) return std::nullopt;
  ClientEntry gone = *it;
  entries_.erase(it);
  return gone;
}

std::vector<ClientEntry> ClientRegistry::expire(time_point now) {
  std::vector<ClientEntry> dropped;
  std::erase_if(entries_, [&](const ClientEntry& e) {
    if (now - e.last_seen < stale_after_) return false;
    dropped.push_back(e);
    return true;
  });
  return dropped;
}

const ClientEntry* ClientRegistry::find(UserId user, ClientKind kind) const {
  for (const auto& e : entries_)
    if (e.user == user && e.kind == kind) return &e;
  return nullptr;
}

std::vector<ClientEntry> ClientRegistry::clients(ClientKind kind) const {
  std::vector<ClientEntry> out;
  for (const auto& e : entries_)
    if (e.kind == kind) out.push_back(e);
  return out;
}

}  // namespace mrdaw
