#pragma once

// Discrete-event replay of pedal/panel traces through the full stack under a
// seeded network model, in virtual time.

#include <cstdint>
#include <istream>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audio.hpp"
#include "session.hpp"
#include "snapshot.hpp"

namespace mrdaw::sim {

struct TraceEvent {
  double t_ms = 0.0;
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;

  bool operator==(const TraceEvent&) const = default;
};

// JSON Lines, one {"t_ms":..,"user":..,"event":..[,"track":..]} per line.
// Blank lines are skipped. Throws Error(parse) naming the 1-based line.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace(std::string_view text);
std::vector<TraceEvent> load_trace(const std::string& path);
std::string format_trace(const std::vector<TraceEvent>& trace);

struct LatencyModel {
  double one_way_ms = 0.0;
  double jitter_ms = 0.0;  // uniform half-width around one_way_ms
  std::uint64_t seed = 0;
  double loss_pct = 0.0;  // applies to state broadcasts

  void validate() const;
};

// local, metro, continental, 1000km-fiber. One-way figures are engineering
// estimates; jitter and loss are zero.
std::optional<LatencyModel> latency_preset(std::string_view name);

struct SimOptions {
  SessionConfig config;
  std::size_t block_size = kDefaultBlockSize;
  double broadcast_interval_ms = 50.0;
  // Copies of each snapshot datagram sent to every client; receivers drop
  // duplicates by sequence number.
  std::uint32_t snapshot_redundancy = 3;
  // Virtual time simulated past the convergence bound after the last event.
  double tail_ms = 1000.0;
};

struct StepRecord {
  SampleIndex t = 0;  // server arrival time
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;
  bool accepted = false;
  SessionState state;  // after the event
  std::vector<SampleIndex> finalized_lengths;
};

struct ClientReport {
  UserId user = 0;
  bool converged = false;
  double convergence_ms = 0.0;  // after the final trace event
  std::uint64_t snapshots_received = 0;
  std::uint64_t snapshots_lost = 0;
  std::uint64_t snapshots_stale = 0;  // duplicates and reordered copies
  std::optional<SnapshotView> view;
  std::uint64_t view_seq = 0;
};

struct SimReport {
  LatencyModel model;
  SessionConfig config;
  std::uint32_t sample_rate = 48000;
  std::size_t trace_events = 0;
  std::vector<StepRecord> steps;
  SessionState final_state;
  SnapshotView final_view;
  std::uint64_t final_seq = 0;
  std::vector<std::uint64_t> broadcast_seqs;
  std::vector<ClientReport> clients;
  LoopStore loops;
  std::vector<std::vector<float>> audio;  // per user, whole run
  double last_event_ms = 0.0;
  double convergence_bound_ms = 0.0;
  double duration_ms = 0.0;
  std::string audio_hash;
  std::string state_hash;
  std::vector<std::string> violations;
};

// Pure function of its arguments. The report comes back with violations
// already filled in by check_invariants.
SimReport simulate(const std::vector<TraceEvent>& trace, const LatencyModel& model,
                   const SimOptions& options = {});

// Named failures; empty when every invariant holds.
std::vector<std::string> check_invariants(const SimReport& report);

nlohmann::json report_to_json(const SimReport& report);

// Session content that does not depend on arrival timing: track variants,
// owners, cursors, transport and whether a loop length exists.
nlohmann::json discrete_signature(const SessionState& state);

// Deterministic synthetic instrument for user `user` at absolute sample n.
float synthetic_input(UserId user, SampleIndex n);

}  // namespace mrdaw::sim
