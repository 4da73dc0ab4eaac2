#include "server.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "engine.hpp"
#include "error.hpp"
#include "osc.hpp"
#include "registry.hpp"
#include "sim.hpp"
#include "snapshot.hpp"
#include "wav.hpp"

namespace mrdaw {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;
using Clock = std::chrono::steady_clock;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::get("mrdaw");
    return l ? l : spdlog::stderr_color_mt("mrdaw");
  }();
  return log;
}

struct Published {
  std::uint64_t seq = 0;
  std::string panel;
  std::vector<std::vector<std::uint8_t>> osc;
};

struct Pending {
  UserId user = 0;
  EventKind kind = EventKind::record_toggle;
  TrackIndex track = 0;
};

const char* mime_type(const std::filesystem::path& p) {
  static const std::map<std::string, const char*> types = {
      {".html", "text/html; charset=utf-8"},
      {".htm", "text/html; charset=utf-8"},
      {".js", "text/javascript; charset=utf-8"},
      {".mjs", "text/javascript; charset=utf-8"},
      {".css", "text/css; charset=utf-8"},
      {".json", "application/json"},
      {".map", "application/json"},
      {".svg", "image/svg+xml"},
      {".png", "image/png"},
      {".ico", "image/x-icon"},
      {".wasm", "application/wasm"},
      {".txt", "text/plain; charset=utf-8"},
  };
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

std::string_view path_of(beast::string_view target) {
  const std::string_view t(target.data(), target.size());
  return t.substr(0, t.find_first_of("?#"));
}

}  // namespace

void ServerConfig::validate() const {
  session.validate();
  if (block_size == 0) throw Error(Errc::invalid_argument, "block size must be > 0");
  if (broadcast_interval.count() <= 0) throw Error(Errc::invalid_argument, "broadcast interval must be > 0");
  if (snapshot_redundancy == 0) throw Error(Errc::invalid_argument, "snapshot redundancy must be >= 1");
  if (stale_after.count() <= 0) throw Error(Errc::invalid_argument, "stale timeout must be > 0");
  if (backend == BackendKind::osc_out) parse_host_port(osc_out_target);
  boost::system::error_code ec;
  asio::ip::make_address(bind_address, ec);
  if (ec) throw Error(Errc::invalid_argument, "bad bind address '" + bind_address + "'");
}

std::pair<std::string, std::uint16_t> parse_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw Error(Errc::invalid_argument, "expected host:port, got '" + text + "'");
  std::string host = text.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "bad port in '" + text + "'");
  }
  if (port == 0 || port > 65535) throw Error(Errc::invalid_argument, "port out of range in '" + text + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto log = logger();
    log->set_level(spdlog::level::info);
    const char* env = std::getenv("MRDAW_LOG");
    if (!env || !*env) return;
    const std::string name(env);
    const auto level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      log->warn("MRDAW_LOG='{}' not recognised, using info", name);
      return;
    }
    log->set_level(level);
  });
}

// --- implementation ----------------------------------------------------------

class WsSession;

struct Server::Impl {
  explicit Impl(ServerConfig c)
      : cfg(std::move(c)),
        engine(cfg.session, cfg.block_size),
        registry(cfg.stale_after),
        sweep(io),
        osc_sock(io),
        acceptor(io),
        out_sock(out_io) {}

  void start();
  void stop();

  // engine thread
  void engine_loop();
  void publish(const SnapshotView& view);

  // I/O thread
  void receive_osc();
  void handle_osc(std::span<const std::uint8_t> bytes, const udp::endpoint& from);
  void send_osc(const udp::endpoint& to, const osc::Message& msg);
  void fan_out(const std::shared_ptr<const Published>& p);
  void send_snapshot(const ClientEntry& client, const Published& p);
  void accept();
  void schedule_sweep();
  void enqueue(const Pending& p);
  void update_counts();
  void on_ws_open(const std::shared_ptr<WsSession>& s);
  void on_ws_text(WsSession& s, std::string_view text);
  void on_ws_closed(std::uint64_t id);
  http::response<http::string_body> serve_static(const http::request<http::string_body>& req) const;

  ServerConfig cfg;
  Engine engine;

  asio::io_context io;
  ClientRegistry registry;
  std::map<std::uint64_t, std::weak_ptr<WsSession>> sessions;
  std::uint64_t next_connection = 1;
  std::shared_ptr<const Published> latest;
  asio::steady_timer sweep;
  udp::socket osc_sock;
  std::array<std::uint8_t, 65536> rx{};
  udp::endpoint rx_from;
  tcp::acceptor acceptor;

  asio::io_context out_io;
  udp::socket out_sock;
  udp::endpoint out_target;

  std::mutex queue_mu;
  std::condition_variable queue_cv;
  std::vector<Pending> queue;
  bool stopping = false;

  std::thread io_thread;
  std::thread engine_thread;
  std::atomic<bool> running{false};
  bool stopped = false;
  std::uint16_t bound_osc = 0;
  std::uint16_t bound_ws = 0;
  std::vector<std::filesystem::path> exported;

  struct Counters {
    std::atomic<std::uint64_t> osc_packets{0}, osc_malformed{0}, osc_unknown{0}, ws_messages{0},
        ws_rejected{0}, events_applied{0}, events_rejected{0}, snapshots{0}, seq{0}, osc_clients{0},
        ws_clients{0}, clients_expired{0};
  } n;
};

// --- WebSocket session -------------------------------------------------------

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(Server::Impl& srv, tcp::socket socket, std::uint64_t id)
      : srv_(srv), ws_(std::move(socket)), id_(id) {}

  void run(http::request<http::string_body> req) {
    websocket::stream_base::timeout t{};
    t.handshake_timeout = std::chrono::seconds(10);
    t.idle_timeout = srv_.cfg.stale_after;
    t.keep_alive_pings = true;
    ws_.set_option(t);
    ws_.read_message_max(64 * 1024);
    ws_.control_callback([this](websocket::frame_type, beast::string_view) { touch(); });
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->srv_.on_ws_open(self);
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> text) {
    if (closed_) return;
    // Snapshots are full states, so a slow reader only needs the newest.
    if (outq_.size() > kMaxQueued) outq_.erase(outq_.begin() + 1, outq_.end() - 1);
    outq_.push_back(std::move(text));
    if (outq_.size() == 1) write_next();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  void touch() {
    if (user_) srv_.registry.touch(peer(), Clock::now());
  }

  ClientEntry peer() const {
    ClientEntry e;
    e.user = user_.value_or(0);
    e.kind = ClientKind::websocket;
    e.connection = id_;
    e.last_seen = Clock::now();
    return e;
  }

  std::uint64_t id() const { return id_; }
  std::optional<UserId> user() const { return user_; }
  void bind(UserId u) { user_ = u; }

 private:
  static constexpr std::size_t kMaxQueued = 32;

  void read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->srv_.on_ws_closed(self->id_);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->srv_.on_ws_text(*self, text);
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*outq_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return;
                      self->outq_.pop_front();
                      if (!self->outq_.empty()) self->write_next();
                    });
  }

  Server::Impl& srv_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  std::deque<std::shared_ptr<const std::string>> outq_;
  std::uint64_t id_;
  std::optional<UserId> user_;
  bool closed_ = false;
};

// --- HTTP session ------------------------------------------------------------

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(Server::Impl& srv, tcp::socket socket) : srv_(srv), stream_(std::move(socket)) {}

  void read() {
    parser_.emplace();
    parser_->body_limit(64 * 1024);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, *parser_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->on_request(self->parser_->release());
    });
  }

 private:
  void on_request(http::request<http::string_body> req) {
    if (websocket::is_upgrade(req)) {
      if (path_of(req.target()) != "/panel") {
        respond(error(req, http::status::not_found, "no WebSocket endpoint here\n"));
        return;
      }
      stream_.expires_never();
      auto ws = std::make_shared<WsSession>(srv_, stream_.release_socket(), srv_.next_connection++);
      ws->run(std::move(req));
      return;
    }
    respond(srv_.serve_static(req));
  }

  static http::response<http::string_body> error(const http::request<http::string_body>& req,
                                                 http::status status, std::string body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, "text/plain; charset=utf-8");
    res.keep_alive(false);
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  void respond(http::response<http::string_body> res) {
    auto owned = std::make_shared<http::response<http::string_body>>(std::move(res));
    http::async_write(stream_, *owned, [self = shared_from_this(), owned](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (owned->keep_alive()) {
        self->read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  Server::Impl& srv_;
  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

http::response<http::string_body> Server::Impl::serve_static(
    const http::request<http::string_body>& req) const {
  auto reply = [&](http::status status, std::string body, const char* type) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "mrdaw");
    res.set(http::field::content_type, type);
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    if (req.method() == http::verb::head) res.body().clear();
    return res;
  };
  if (req.method() != http::verb::get && req.method() != http::verb::head)
    return reply(http::status::method_not_allowed, "method not allowed\n", "text/plain");

  std::string path(path_of(req.target()));
  if (path.empty() || path.front() != '/' || path.find("..") != std::string::npos ||
      path.find('\\') != std::string::npos || path.find('\0') != std::string::npos)
    return reply(http::status::bad_request, "bad path\n", "text/plain");
  if (cfg.web_root.empty()) return reply(http::status::not_found, "not found\n", "text/plain");
  if (path.back() == '/') path += "index.html";

  const std::filesystem::path file = cfg.web_root / path.substr(1);
  std::error_code fec;
  if (!std::filesystem::is_regular_file(file, fec))
    return reply(http::status::not_found, "not found\n", "text/plain");
  std::ifstream in(file, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  if (!in) return reply(http::status::internal_server_error, "read failed\n", "text/plain");
  return reply(http::status::ok, body.str(), mime_type(file));
}

// --- I/O thread --------------------------------------------------------------

void Server::Impl::receive_osc() {
  osc_sock.async_receive_from(asio::buffer(rx), rx_from,
                              [this](boost::system::error_code ec, std::size_t bytes) {
                                if (ec == asio::error::operation_aborted || !osc_sock.is_open()) return;
                                if (!ec) handle_osc({rx.data(), bytes}, rx_from);
                                receive_osc();
                              });
}

void Server::Impl::handle_osc(std::span<const std::uint8_t> bytes, const udp::endpoint& from) {
  ++n.osc_packets;
  osc::Message msg;
  try {
    msg = osc::decode(bytes);
  } catch (const osc::DecodeError& e) {
    ++n.osc_malformed;
    logger()->debug("malformed OSC from {}:{}: {} at byte {}", from.address().to_string(), from.port(),
                    osc::to_string(e.kind()), e.offset());
    return;
  }
  const auto cmd = osc::route_upstream(msg);
  if (!cmd) {
    ++n.osc_unknown;
    logger()->debug("unknown OSC address {} from {}", msg.address, from.address().to_string());
    send_osc(from, osc::debug_message("unknown address " + msg.address));
    return;
  }
  const UserId user = std::visit([](const auto& c) { return c.user; }, *cmd);
  if (!is_valid_user(cfg.session, user)) {
    ++n.events_rejected;
    send_osc(from, osc::debug_message("unknown user " + std::to_string(user)));
    return;
  }

  ClientEntry peer;
  peer.user = user;
  peer.kind = ClientKind::osc;
  peer.address = from.address().to_string();
  peer.port = from.port();
  peer.last_seen = Clock::now();
  const bool known =
      registry.find(user, ClientKind::osc) && registry.find(user, ClientKind::osc)->same_peer(peer);
  if (auto displaced = registry.upsert(peer))
    logger()->info("user {} OSC client moved from {}:{} to {}:{}", user, displaced->address, displaced->port,
                   peer.address, peer.port);
  update_counts();

  if (auto* hello = std::get_if<osc::HelloCommand>(&*cmd)) {
    logger()->info("hello from user {} ({}) at {}:{}", user, hello->client_name, peer.address, peer.port);
    if (latest) send_snapshot(peer, *latest);
  } else if (auto* ctl = std::get_if<osc::ControlCommand>(&*cmd)) {
    if (!known && latest) send_snapshot(peer, *latest);
    enqueue({ctl->user, ctl->kind, ctl->track});
  }
}

void Server::Impl::send_osc(const udp::endpoint& to, const osc::Message& msg) {
  const auto bytes = osc::encode(msg);
  boost::system::error_code ec;
  osc_sock.send_to(asio::buffer(bytes), to, 0, ec);
}

void Server::Impl::send_snapshot(const ClientEntry& client, const Published& p) {
  if (client.kind == ClientKind::osc) {
    boost::system::error_code ec;
    const auto addr = asio::ip::make_address(client.address, ec);
    if (ec) return;
    const udp::endpoint to(addr, cfg.broadcast_port ? cfg.broadcast_port : client.port);
    for (std::uint32_t copy = 0; copy < cfg.snapshot_redundancy; ++copy)
      for (const auto& d : p.osc) osc_sock.send_to(asio::buffer(d), to, 0, ec);
    return;
  }
  auto it = sessions.find(client.connection);
  if (it == sessions.end()) return;
  if (auto s = it->second.lock()) s->send(std::make_shared<const std::string>(p.panel));
}

void Server::Impl::fan_out(const std::shared_ptr<const Published>& p) {
  latest = p;
  const auto text = std::make_shared<const std::string>(p->panel);
  for (const auto& c : registry.clients(ClientKind::osc)) send_snapshot(c, *p);
  for (const auto& c : registry.clients(ClientKind::websocket)) {
    auto it = sessions.find(c.connection);
    if (it == sessions.end()) continue;
    if (auto s = it->second.lock()) s->send(text);
  }
}

void Server::Impl::accept() {
  acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
    if (ec == asio::error::operation_aborted || !acceptor.is_open()) return;
    if (!ec) std::make_shared<HttpSession>(*this, std::move(socket))->read();
    accept();
  });
}

void Server::Impl::schedule_sweep() {
  sweep.expires_after(std::min<std::chrono::milliseconds>(cfg.stale_after / 4, std::chrono::seconds(1)));
  sweep.async_wait([this](boost::system::error_code ec) {
    if (ec) return;
    for (const auto& gone : registry.expire(Clock::now())) {
      ++n.clients_expired;
      logger()->info("dropped stale {} client for user {}", to_string(gone.kind), gone.user);
      if (gone.kind != ClientKind::websocket) continue;
      auto it = sessions.find(gone.connection);
      if (it != sessions.end())
        if (auto s = it->second.lock()) s->close();
    }
    update_counts();
    schedule_sweep();
  });
}

void Server::Impl::update_counts() {
  n.osc_clients = registry.clients(ClientKind::osc).size();
  n.ws_clients = registry.clients(ClientKind::websocket).size();
}

void Server::Impl::on_ws_open(const std::shared_ptr<WsSession>& s) {
  sessions[s->id()] = s;
  logger()->debug("panel connection {} open", s->id());
}

void Server::Impl::on_ws_text(WsSession& s, std::string_view text) {
  ++n.ws_messages;
  auto fail = [&](const std::string& why) {
    ++n.ws_rejected;
    s.send(std::make_shared<const std::string>(panel_error_message(why).dump()));
  };
  PanelInbound in;
  try {
    in = parse_panel_message(text);
  } catch (const Error& e) {
    fail(e.what());
    return;
  }
  if (auto* hello = std::get_if<PanelHello>(&in)) {
    if (!is_valid_user(cfg.session, hello->user)) {
      fail("unknown user " + std::to_string(hello->user));
      return;
    }
    registry.remove_connection(s.id());
    s.bind(hello->user);
    if (auto displaced = registry.upsert(s.peer())) {
      auto it = sessions.find(displaced->connection);
      if (it != sessions.end())
        if (auto old = it->second.lock()) {
          old->send(std::make_shared<const std::string>(
              panel_error_message("replaced by a newer panel for user " + std::to_string(hello->user))
                  .dump()));
          old->close();
        }
    }
    update_counts();
    logger()->info("panel connection {} bound to user {}", s.id(), hello->user);
    if (latest) s.send(std::make_shared<const std::string>(latest->panel));
    return;
  }
  const auto& ev = std::get<PanelEvent>(in);
  if (!s.user()) {
    fail("send hello first");
    return;
  }
  if (ev.user != *s.user()) {
    fail("panel is bound to user " + std::to_string(*s.user()));
    return;
  }
  s.touch();
  enqueue({ev.user, ev.kind, ev.track});
}

void Server::Impl::on_ws_closed(std::uint64_t id) {
  sessions.erase(id);
  if (registry.remove_connection(id)) update_counts();
  logger()->debug("panel connection {} closed", id);
}

void Server::Impl::enqueue(const Pending& p) {
  std::lock_guard lock(queue_mu);
  queue.push_back(p);
}

// --- engine thread -----------------------------------------------------------

void Server::Impl::publish(const SnapshotView& view) {
  auto p = std::make_shared<Published>();
  p->seq = ++n.seq;
  p->panel = panel_state_message(view, p->seq).dump();
  for (const auto& m : osc_state_messages(view, p->seq)) p->osc.push_back(osc::encode(m));
  ++n.snapshots;
  asio::post(io, [this, p = std::shared_ptr<const Published>(std::move(p))] { fan_out(p); });
}

void Server::Impl::engine_loop() {
  const std::size_t users = cfg.session.num_users;
  const std::size_t block = cfg.block_size;
  const auto block_time = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(static_cast<double>(block) / cfg.session.sample_rate));
  std::vector<std::vector<float>> live(users, std::vector<float>(block, 0.0f));
  std::vector<std::span<const float>> spans(users);
  for (std::size_t u = 0; u < users; ++u) spans[u] = live[u];

  std::optional<SnapshotView> last_view;
  Clock::time_point last_publish{};
  Clock::time_point deadline = Clock::now();
  std::vector<Pending> batch;

  while (true) {
    {
      std::lock_guard lock(queue_mu);
      if (stopping) break;
      batch.swap(queue);
    }
    for (const auto& p : batch) {
      const ApplyResult r = engine.submit(p.user, p.kind, p.track);
      if (r.accepted()) {
        ++n.events_applied;
        logger()->debug("user {} {} (track {}) applied at sample {}", p.user, to_string(p.kind), p.track,
                        engine.now());
      } else {
        ++n.events_rejected;
      }
    }
    batch.clear();
    for (auto& d : engine.take_diagnostics()) logger()->debug("{}", d);

    if (cfg.input == InputKind::synthetic)
      for (std::size_t u = 0; u < users; ++u)
        for (std::size_t k = 0; k < block; ++k)
          live[u][k] = sim::synthetic_input(static_cast<UserId>(u + 1), engine.now() + k);
    engine.process(spans, {}, block);

    const auto now = Clock::now();
    SnapshotView view = make_view(engine.state());
    if (!last_view || view != *last_view || now - last_publish >= cfg.broadcast_interval) {
      publish(view);
      last_view = std::move(view);
      last_publish = now;
    }

    deadline += block_time;
    // After a long stall, resume pacing from now instead of racing to catch up.
    if (now - deadline > std::chrono::milliseconds(200)) deadline = now;
    std::unique_lock lock(queue_mu);
    queue_cv.wait_until(lock, deadline, [this] { return stopping; });
  }
}

// --- lifecycle ---------------------------------------------------------------

void Server::Impl::start() {
  configure_logging();
  cfg.validate();
  const auto addr = asio::ip::make_address(cfg.bind_address);
  boost::system::error_code ec;

  osc_sock.open(addr.is_v6() ? udp::v6() : udp::v4(), ec);
  if (!ec) osc_sock.bind({addr, cfg.osc_port}, ec);
  if (ec) throw Error(Errc::bind, "OSC port " + std::to_string(cfg.osc_port) + ": " + ec.message());
  bound_osc = osc_sock.local_endpoint().port();

  acceptor.open(addr.is_v6() ? tcp::v6() : tcp::v4(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind({addr, cfg.ws_port}, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    osc_sock.close();
    throw Error(Errc::bind, "WebSocket port " + std::to_string(cfg.ws_port) + ": " + ec.message());
  }
  bound_ws = acceptor.local_endpoint().port();

  if (cfg.backend == BackendKind::osc_out) {
    const auto [host, port] = parse_host_port(cfg.osc_out_target);
    udp::resolver resolver(out_io);
    auto results = resolver.resolve(udp::v4(), host, std::to_string(port), ec);
    if (ec || results.empty())
      throw Error(Errc::invalid_argument, "cannot resolve " + cfg.osc_out_target + ": " + ec.message());
    out_target = *results.begin();
    out_sock.open(udp::v4());
    engine.mirror_to(std::make_shared<OscOutBackend>([this](const osc::Message& m) {
      const auto bytes = osc::encode(m);
      boost::system::error_code sec;
      out_sock.send_to(asio::buffer(bytes), out_target, 0, sec);
      if (sec) logger()->warn("osc-out send to {} failed: {}", cfg.osc_out_target, sec.message());
    }));
  }

  receive_osc();
  accept();
  schedule_sweep();
  running = true;
  io_thread = std::thread([this] { io.run(); });
  engine_thread = std::thread([this] { engine_loop(); });
  logger()->info("listening: OSC udp/{}, panel ws://{}:{}/panel, broadcast {}", bound_osc, cfg.bind_address,
                 bound_ws,
                 cfg.broadcast_port ? "udp/" + std::to_string(cfg.broadcast_port) : "to source port");
}

void Server::Impl::stop() {
  if (stopped || !running) return;
  stopped = true;
  {
    std::lock_guard lock(queue_mu);
    stopping = true;
  }
  queue_cv.notify_all();
  engine_thread.join();

  asio::post(io, [this] {
    boost::system::error_code ec;
    sweep.cancel();
    osc_sock.close(ec);
    acceptor.close(ec);
    for (auto& [id, weak] : sessions)
      if (auto s = weak.lock()) s->close();
    // Give close frames a moment to go out, then stop.
    auto t = std::make_shared<asio::steady_timer>(io, std::chrono::milliseconds(100));
    t->async_wait([this, t](boost::system::error_code) { io.stop(); });
  });
  io_thread.join();
  running = false;

  if (!cfg.export_dir.empty()) {
    try {
      std::filesystem::create_directories(cfg.export_dir);
      exported = export_wav(engine.state(), engine.audio().loops(), (cfg.export_dir / "session").string());
      for (const auto& p : exported) logger()->info("exported {}", p.string());
    } catch (const std::exception& e) {
      logger()->warn("export skipped: {}", e.what());
    }
  }
  logger()->info("stopped after {} events, {} snapshots", n.events_applied.load(), n.snapshots.load());
}

// --- public ------------------------------------------------------------------

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running || impl_->stopped) throw Error(Errc::invalid_argument, "server already started");
  impl_->start();
}

void Server::stop() { impl_->stop(); }

bool Server::running() const { return impl_->running; }
std::uint16_t Server::osc_port() const { return impl_->bound_osc; }
std::uint16_t Server::ws_port() const { return impl_->bound_ws; }
std::vector<std::filesystem::path> Server::exported() const { return impl_->exported; }

ServerStats Server::stats() const {
  const auto& n = impl_->n;
  ServerStats s;
  s.osc_packets = n.osc_packets;
  s.osc_malformed = n.osc_malformed;
  s.osc_unknown = n.osc_unknown;
  s.ws_messages = n.ws_messages;
  s.ws_rejected = n.ws_rejected;
  s.events_applied = n.events_applied;
  s.events_rejected = n.events_rejected;
  s.snapshots = n.snapshots;
  s.seq = n.seq;
  s.osc_clients = n.osc_clients;
  s.ws_clients = n.ws_clients;
  s.clients_expired = n.clients_expired;
  return s;
}

}  // namespace mrdaw
