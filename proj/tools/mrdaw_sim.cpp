// mrdaw-sim: replay a pedal/panel trace under a network model.

#include <mrdaw/mrdaw.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kViolations = 1;
constexpr int kError = 2;

struct ReportDeleter {
  void operator()(mrdaw_sim_report* r) const { mrdaw_sim_report_destroy(r); }
};

int error(const std::string& what, mrdaw_status status) {
  std::cerr << "mrdaw-sim: " << what << ": " << mrdaw_status_string(status);
  if (*mrdaw_last_error()) std::cerr << " (" << mrdaw_last_error() << ")";
  std::cerr << "\n";
  return kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic replay of loop-session traces under simulated latency"};
  app.require_subcommand(1);

  std::string trace;
  std::string preset;
  std::optional<double> one_way, jitter, loss;
  std::uint64_t seed = 0;
  std::string wav_dir, report_path;
  mrdaw_session_config session;
  mrdaw_session_config_default(&session);
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Replay a trace and check invariants");
  run->add_option("--trace", trace, "JSON Lines trace file")->required()->check(CLI::ExistingFile);
  run->add_option("--latency", preset, "Preset: local, metro, continental, 1000km-fiber");
  run->add_option("--one-way", one_way, "One-way delay in ms (overrides the preset)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--jitter", jitter, "Uniform jitter half-width in ms")->check(CLI::NonNegativeNumber);
  run->add_option("--loss", loss, "Snapshot datagram loss in percent")->check(CLI::Range(0.0, 100.0));
  run->add_option("--seed", seed, "Network model seed");
  run->add_option("--users", session.num_users, "Number of users")->capture_default_str();
  run->add_option("--tracks-per-user", session.tracks_per_user, "Tracks per user")->capture_default_str();
  run->add_option("--sample-rate", session.sample_rate, "Sample rate in Hz")->capture_default_str();
  run->add_option("--emit-wav", wav_dir, "Write each user's output as <dir>/sim_u<N>.wav");
  run->add_option("--report", report_path, "Write the JSON report here ('-' for stdout)");
  run->add_flag("-q,--quiet", quiet, "Print violations only");

  CLI11_PARSE(app, argc, argv);

  mrdaw_latency latency{0.0, 0.0, 0.0, 0};
  if (!preset.empty()) {
    if (auto st = mrdaw_latency_preset(preset.c_str(), &latency); st != MRDAW_OK)
      return error("--latency", st);
  }
  if (one_way) latency.one_way_ms = *one_way;
  if (jitter) latency.jitter_ms = *jitter;
  if (loss) latency.loss_pct = *loss;
  latency.seed = seed;

  mrdaw_sim_report* raw = nullptr;
  if (auto st = mrdaw_sim_run_file(trace.c_str(), &latency, &session, &raw); st != MRDAW_OK)
    return error("run", st);
  std::unique_ptr<mrdaw_sim_report, ReportDeleter> report(raw);

  if (!report_path.empty()) {
    if (report_path == "-") {
      std::cout << mrdaw_sim_report_json(report.get());
    } else {
      std::ofstream out(report_path, std::ios::binary);
      out << mrdaw_sim_report_json(report.get());
      if (!out) {
        std::cerr << "mrdaw-sim: cannot write " << report_path << "\n";
        return kError;
      }
    }
  }
  if (!wav_dir.empty()) {
    if (auto st = mrdaw_sim_write_wavs(report.get(), wav_dir.c_str()); st != MRDAW_OK)
      return error("--emit-wav", st);
  }

  const std::size_t violations = mrdaw_sim_violation_count(report.get());
  for (std::size_t i = 0; i < violations; ++i)
    std::cerr << "violation: " << mrdaw_sim_violation(report.get(), i) << "\n";
  if (!quiet && report_path != "-") {
    std::printf("model       one_way=%gms jitter=%gms loss=%g%% seed=%llu\n", latency.one_way_ms,
                latency.jitter_ms, latency.loss_pct, static_cast<unsigned long long>(latency.seed));
    std::printf("state_hash  %s\n", mrdaw_sim_state_hash(report.get()));
    std::printf("audio_hash  %s\n", mrdaw_sim_audio_hash(report.get()));
    std::printf("violations  %zu\n", violations);
  }
  return violations == 0 ? 0 : kViolations;
}
