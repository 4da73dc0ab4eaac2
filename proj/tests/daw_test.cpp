#include "daw.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

#include "engine.hpp"

using namespace mrdaw;

namespace {

struct Recorder : DawBackend {
  std::vector<BackendCall> calls;
  bool fail_enable = false;
  void start_capture(TrackIndex t) override { calls.push_back({CallKind::start_capture, t}); }
  void stop_capture(TrackIndex t) override { calls.push_back({CallKind::stop_capture, t}); }
  void enable(TrackIndex t) override {
    if (fail_enable) throw std::runtime_error("device offline");
    calls.push_back({CallKind::enable, t});
  }
  void disable(TrackIndex t) override { calls.push_back({CallKind::disable, t}); }
  void transport_start() override { calls.push_back({CallKind::transport_start, 0}); }
  void transport_stop() override { calls.push_back({CallKind::transport_stop, 0}); }
};

using E = EffectKind;
using C = CallKind;

}  // namespace

TEST_CASE("dispatch maps effects one to one, in order") {
  Recorder r;
  auto rep = dispatch({{E::transport_start, 0, 0}, {E::start_capture, 1, 0}}, r);
  CHECK(rep.calls == std::vector<BackendCall>{{C::transport_start, 0}, {C::start_capture, 0}});
  CHECK(r.calls == rep.calls);

  r.calls.clear();
  rep = dispatch({{E::broadcast, 0, 0}}, r);
  CHECK(rep.calls.empty());
  CHECK(r.calls.empty());

  rep = dispatch({{E::stop_capture_and_finalize, 1, 0}, {E::track_enable, 0, 0}}, r);
  CHECK(rep.calls == std::vector<BackendCall>{{C::stop_capture, 0}, {C::enable, 0}});
}

TEST_CASE("dispatch reports backend failures and keeps going") {
  Recorder r;
  r.fail_enable = true;
  const auto rep = dispatch({{E::track_enable, 0, 2}, {E::track_disable, 0, 3}}, r);
  CHECK(rep.failures.size() == 1);
  CHECK(r.calls == std::vector<BackendCall>{{C::disable, 3}});
}

TEST_CASE("osc_out_translate follows the AbletonOSC address family") {
  using osc::Message;
  CHECK(osc_out_translate({C::transport_start, 0}) == Message{"/live/song/start_playing", {}});
  CHECK(osc_out_translate({C::transport_stop, 0}) == Message{"/live/song/stop_playing", {}});
  CHECK(osc_out_translate({C::disable, 3}) == Message{"/live/clip/stop", {std::int32_t{3}, std::int32_t{0}}});
  CHECK(osc_out_translate({C::enable, 3}) == Message{"/live/clip/fire", {std::int32_t{3}, std::int32_t{0}}});
  CHECK(osc_out_translate({C::start_capture, 1}) ==
        Message{"/live/clip_slot/fire", {std::int32_t{1}, std::int32_t{0}}});
  CHECK(osc_out_translate({C::stop_capture, 1}) ==
        Message{"/live/clip_slot/fire", {std::int32_t{1}, std::int32_t{0}}});
  for (auto k :
       {C::start_capture, C::stop_capture, C::enable, C::disable, C::transport_start, C::transport_stop})
    CHECK(osc::encode(osc_out_translate({k, 7})).size() % 4 == 0);
}

TEST_CASE("OscOutBackend mirrors engine calls") {
  std::vector<osc::Message> sent;
  auto out = std::make_shared<OscOutBackend>([&](const osc::Message& m) { sent.push_back(m); });
  Engine e({});
  e.mirror_to(out);
  e.submit(1, EventKind::record_toggle);
  REQUIRE(sent.size() == 2);
  CHECK(sent[0].address == "/live/song/start_playing");
  CHECK(sent[1].address == "/live/clip_slot/fire");
}

namespace {

void feed(Engine& e, std::size_t frames, float value_u1, float value_u2) {
  const std::vector<float> a(frames, value_u1), b(frames, value_u2);
  const std::vector<std::span<const float>> live{a, b};
  e.process(live, {}, frames);
}

}  // namespace

TEST_CASE("mock backend captures and finalizes through the engine") {
  Engine e({}, 256);
  std::vector<float> take(1000);
  for (std::size_t k = 0; k < take.size(); ++k) take[k] = 0.001f * static_cast<float>(k % 500);

  e.submit(1, EventKind::record_toggle);
  {
    const std::vector<float> silent(take.size(), 0.0f);
    const std::vector<std::span<const float>> live{take, silent};
    e.process(live, {}, take.size());
  }
  e.submit(1, EventKind::record_toggle);
  REQUIRE(e.state().master_len == 1000u);
  const auto id = *e.state().tracks[0].content;
  CHECK(e.audio().loops().at(id)->samples == take);

  // User 2 starts 300 samples into the loop and plays 1700 samples of 0.25.
  feed(e, 300, 0.0f, 0.0f);
  e.submit(2, EventKind::record_toggle);
  feed(e, 1700, 0.0f, 0.25f);
  e.submit(2, EventKind::record_toggle);
  const auto& loop2 = e.audio().loops().at(*e.state().tracks[4].content)->samples;
  REQUIRE(loop2.size() == 1000);
  // Oracle: the first 1000 captured samples land at (300 + k) mod 1000.
  for (std::size_t pos = 0; pos < 1000; ++pos) CHECK(loop2[pos] == 0.25f);

  CHECK(e.call_log() == std::vector<BackendCall>{{C::transport_start, 0},
                                                 {C::start_capture, 0},
                                                 {C::stop_capture, 0},
                                                 {C::enable, 0},
                                                 {C::start_capture, 4},
                                                 {C::stop_capture, 4},
                                                 {C::enable, 4}});
}

TEST_CASE("engine audio equals render_session bit for bit") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Engine e({}, 64 + rng() % 256);
    std::uniform_real_distribution<float> d(-0.2f, 0.2f);
    for (int step = 0; step < 30; ++step) {
      const std::size_t n = 1 + rng() % 700;
      std::vector<float> a(n), b(n);
      for (auto& v : a) v = d(rng);
      for (auto& v : b) v = d(rng);
      const std::vector<std::span<const float>> live{a, b};
      e.process(live, {}, n);
      const UserId u = 1 + rng() % 2;
      switch (rng() % 6) {
        case 0:
        case 1:
        case 2: e.submit(u, EventKind::record_toggle); break;
        case 3: e.submit(u, EventKind::play_all); break;
        case 4: e.submit(u, EventKind::track_toggle, rng() % 8); break;
        default: break;
      }
    }
    const std::size_t n = 3000;
    const auto offline = render_session(e.state(), e.audio().loops(), n);
    std::vector<float> o1(n), o2(n);
    const std::vector<std::span<float>> out{o1, o2};
    const std::vector<float> silent(n, 0.0f);
    const std::vector<std::span<const float>> live{silent, silent};
    // Open captures do not affect the mix, only later loops.
    e.process(live, out, n);
    CHECK(o1 == offline[0]);
    CHECK(o2 == offline[1]);
  }
}

TEST_CASE("engine reset clears loops") {
  Engine e({});
  e.submit(1, EventKind::record_toggle);
  feed(e, 500, 0.1f, 0.0f);
  e.submit(1, EventKind::record_toggle);
  REQUIRE(e.audio().loops().size() == 1);
  e.reset();
  CHECK(e.audio().loops().empty());
  CHECK(e.state() == make_session({}));
  e.submit(2, EventKind::record_toggle);
  feed(e, 700, 0.0f, 0.1f);
  e.submit(2, EventKind::record_toggle);
  CHECK(e.state().master_len == 700u);
}

TEST_CASE("capture that saw no audio finalizes to silence") {
  Engine e({});
  e.submit(1, EventKind::record_toggle);
  feed(e, 400, 0.3f, 0.0f);
  e.submit(1, EventKind::record_toggle);
  e.submit(2, EventKind::record_toggle);
  e.submit(2, EventKind::stop_all);
  feed(e, 100, 0.0f, 0.3f);
  e.submit(2, EventKind::record_toggle);
  const auto& loop = e.audio().loops().at(*e.state().tracks[4].content)->samples;
  CHECK(loop == std::vector<float>(400, 0.0f));
  CHECK_FALSE(e.take_diagnostics().empty());
}
