#include "sim.hpp"

#include <doctest.h>

#include <algorithm>

#include "error.hpp"

using namespace mrdaw;
using namespace mrdaw::sim;

namespace {

const char* kTwoPress = R"({"t_ms":0,"user":1,"event":"record"}
{"t_ms":1000,"user":1,"event":"record"}
)";

bool has_violation(const SimReport& r, std::string_view name) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.rfind(name, 0) == 0; });
}

}  // namespace

TEST_CASE("trace parsing") {
  const auto t = parse_trace(std::string_view(R"({"t_ms":0,"user":1,"event":"record"}

{"t_ms":12.5,"user":2,"event":"toggle","track":5}
{"t_ms":20,"user":2,"event":"play"}
)"));
  REQUIRE(t.size() == 3);
  CHECK(t[1] == TraceEvent{12.5, 2, EventKind::track_toggle, 5});
  CHECK(parse_trace(format_trace(t)) == t);

  auto line_of = [](std::string_view text) {
    try {
      parse_trace(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(line_of("{\"t_ms\":0,\"user\":1,\"event\":\"record\"}\nnot json\n").find("line 2") !=
        std::string::npos);
  CHECK(line_of("{\"t_ms\":5,\"user\":1,\"event\":\"record\"}\n{\"t_ms\":4,\"user\":1,\"event\":\"stop\"}")
            .find("line 2") != std::string::npos);
  CHECK(line_of("{\"t_ms\":0,\"user\":1,\"event\":\"toggle\"}").find("line 1") != std::string::npos);
  CHECK(line_of("{\"t_ms\":-1,\"user\":1,\"event\":\"play\"}").find("line 1") != std::string::npos);
}

TEST_CASE("latency presets") {
  CHECK(latency_preset("local")->one_way_ms == 0.0);
  CHECK(latency_preset("metro")->one_way_ms == 5.0);
  CHECK(latency_preset("continental")->one_way_ms == 15.0);
  CHECK(latency_preset("1000km-fiber")->one_way_ms == 10.0);
  CHECK_FALSE(latency_preset("mars"));
  LatencyModel bad;
  bad.loss_pct = 101;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("localhost baseline") {
  const SimReport r = simulate(parse_trace(std::string_view(kTwoPress)), {});
  CHECK(r.violations.empty());
  CHECK(r.final_state.tracks[0].variant == TrackVariant::playing);
  CHECK(r.final_state.master_len == 48000u);
  for (const auto& c : r.clients) {
    CHECK(c.converged);
    CHECK(c.convergence_ms == 0.0);
  }
}

TEST_CASE("fixed 50 ms one-way delay") {
  const auto trace = parse_trace(std::string_view(kTwoPress));
  const SimReport base = simulate(trace, {});
  const SimReport r = simulate(trace, {50.0, 0.0, 1, 0.0});
  CHECK(r.violations.empty());
  CHECK(discrete_signature(r.final_state) == discrete_signature(base.final_state));
  CHECK(r.final_state.master_len == base.final_state.master_len);
  for (const auto& c : r.clients) {
    CHECK(c.converged);
    // Closed form: delay out plus broadcast back.
    CHECK(c.convergence_ms <= 100.0);
    CHECK(c.convergence_ms == doctest::Approx(100.0));
  }
}

TEST_CASE("jitter changes interleavings but not the outcome of a conflict-free trace") {
  const auto trace = parse_trace(std::string_view(kTwoPress));
  const auto expected = discrete_signature(simulate(trace, {}).final_state);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SimReport r = simulate(trace, {30.0, 10.0, seed, 0.0});
    CHECK(r.violations.empty());
    CHECK(discrete_signature(r.final_state) == expected);
  }
}

TEST_CASE("check_invariants flags a planted double recording") {
  SimReport r = simulate(parse_trace(std::string_view(kTwoPress)), {});
  CHECK(check_invariants(r).empty());
  r.final_state.tracks[1] = {TrackVariant::recording, 5, 1, std::nullopt};
  r.final_state.tracks[2] = {TrackVariant::recording, 6, 1, std::nullopt};
  r.violations = check_invariants(r);
  CHECK(has_violation(r, "single-recording-per-user"));
}

TEST_CASE("check_invariants flags a changed master length") {
  SimReport r = simulate(parse_trace(std::string_view(kTwoPress)), {});
  r.final_state.master_len = 47999;
  r.violations = check_invariants(r);
  CHECK(has_violation(r, "master-len-write-once"));
  CHECK(has_violation(r, "loop-length-equals-master"));
}

TEST_CASE("simulate is deterministic") {
  const auto trace = parse_trace(std::string_view(kTwoPress));
  const LatencyModel m{20.0, 15.0, 42, 10.0};
  const auto a = report_to_json(simulate(trace, m)).dump();
  const auto b = report_to_json(simulate(trace, m)).dump();
  CHECK(a == b);
}

TEST_CASE("unknown users in a trace are rejected, not fatal") {
  const SimReport r = simulate(parse_trace(std::string_view(R"({"t_ms":0,"user":9,"event":"record"})")), {});
  REQUIRE(r.steps.size() == 1);
  CHECK_FALSE(r.steps[0].accepted);
  CHECK(r.violations.empty());
}
