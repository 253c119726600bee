#include "allconcur/node.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "allconcur/wire.hpp"
#include "json.hpp"

namespace allconcur {

std::vector<MemberAddress> parse_membership(const std::string& text) {
  std::vector<MemberAddress> out;
  std::set<ServerId> ids;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string id_text, host, port_text, extra;
    if (!(fields >> id_text)) continue;
    const std::string where = "membership line " + std::to_string(line_no);
    if (!(fields >> host >> port_text) || (fields >> extra)) throw NodeError(where + ": expected '<id> <host> <port>'");
    unsigned long id = 0, port = 0;
    try {
      std::size_t used = 0;
      id = std::stoul(id_text, &used);
      if (used != id_text.size()) throw std::invalid_argument("id");
      port = std::stoul(port_text, &used);
      if (used != port_text.size()) throw std::invalid_argument("port");
    } catch (const std::exception&) {
      throw NodeError(where + ": id and port must be integers");
    }
    if (port == 0 || port > 65535) throw NodeError(where + ": port out of range");
    if (!ids.insert(static_cast<ServerId>(id)).second) throw NodeError(where + ": duplicate id " + id_text);
    out.push_back(MemberAddress{static_cast<ServerId>(id), host, static_cast<std::uint16_t>(port)});
  }
  if (out.empty()) throw NodeError("membership is empty");
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].id != i) throw NodeError("membership ids must be 0..n-1");
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Conn {
  int fd = -1;
  bool connecting = false;
  bool established = false;
  bool dead = false;
  std::string outbuf;
  FrameReader reader;
  Clock::time_point last_rx{};
  Clock::time_point retry_at{};
  double backoff = 0.02;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

sockaddr_in resolve(const MemberAddress& m) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(m.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw NodeError("cannot resolve host '" + m.host + "'");
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(m.port);
  return addr;
}

class Node {
 public:
  Node(const NodeOptions& opts, std::ostream& out)
      : opts_(opts), out_(out), overlay_(Overlay::dense(opts.graph)), start_(Clock::now()) {
    if (opts.members.size() != opts.graph.size()) throw NodeError("membership and overlay sizes differ");
    if (opts.me >= opts.members.size()) throw NodeError("unknown server id " + std::to_string(opts.me));
    ServerConfig cfg;
    cfg.me = opts.me;
    cfg.overlay = overlay_;
    cfg.mode = opts.mode;
    cfg.max_rounds = opts.rounds;
    cfg.eager_start = true;
    server_.emplace(cfg);
    for (Round r = 1; r <= opts.rounds; ++r) {
      server_->stage(r, opts.payload_prefix + std::to_string(opts.me) + "r" + std::to_string(r));
    }
    for (ServerId s : overlay_->successors(opts.me)) out_conns_[s];
    for (ServerId p : overlay_->predecessors(opts.me)) preds_.insert(p);
  }

  ~Node() {
    for (auto& [id, c] : out_conns_) close_fd(c);
    for (auto& [id, c] : in_conns_) close_fd(c);
    for (auto& c : pending_) close_fd(c);
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  int run() {
    open_listener();
    if (opts_.crash_round && *opts_.crash_round <= 1) crash_now();
    handle(server_->start());
    auto next_hb = Clock::now();
    std::optional<Clock::time_point> done_at;
    while (true) {
      const auto now = Clock::now();
      if (!done_at && server_->finished()) done_at = now;
      if (done_at && seconds(now - *done_at) >= opts_.linger) return 0;
      if (!done_at && seconds(now - start_) > opts_.deadline) return 2;
      if (now >= next_hb) {
        heartbeat();
        monitor(now);
        next_hb = now + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts_.hb_period));
      }
      connect_pending(now);
      poll_once(std::chrono::duration_cast<std::chrono::milliseconds>(next_hb - Clock::now()).count());
    }
  }

 private:
  static double seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

  void close_fd(Conn& c) {
    if (c.fd >= 0) ::close(c.fd);
    c.fd = -1;
  }

  [[noreturn]] void crash_now() {
    out_.flush();
    ::_exit(0);
  }

  void open_listener() {
    const sockaddr_in addr = resolve(opts_.members[opts_.me]);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw NodeError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      throw NodeError("bind port " + std::to_string(opts_.members[opts_.me].port) + ": " + std::strerror(errno));
    }
    if (::listen(listen_fd_, 64) != 0) throw NodeError(std::string("listen: ") + std::strerror(errno));
    set_nonblocking(listen_fd_);
  }

  void connect_pending(Clock::time_point now) {
    for (auto& [id, c] : out_conns_) {
      if (c.dead || c.fd >= 0 || now < c.retry_at) continue;
      const sockaddr_in addr = resolve(opts_.members[id]);
      c.fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (c.fd < 0) continue;
      set_nonblocking(c.fd);
      int one = 1;
      ::setsockopt(c.fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      const int rc = ::connect(c.fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
      if (rc == 0) {
        on_connected(c);
      } else if (errno == EINPROGRESS) {
        c.connecting = true;
      } else {
        retry_later(c, now);
      }
    }
  }

  void retry_later(Conn& c, Clock::time_point now) {
    close_fd(c);
    c.connecting = false;
    c.retry_at = now + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(c.backoff));
    c.backoff = std::min(c.backoff * 2, 0.5);
  }

  void on_connected(Conn& c) {
    c.connecting = false;
    c.established = true;
    c.last_rx = Clock::now();
    c.outbuf.insert(0, encode(WireMessage{Join{0, opts_.me}}));
  }

  void enqueue(Conn& c, const Message& msg) {
    if (c.dead) return;
    c.outbuf += encode(msg);
  }

  void heartbeat() {
    for (auto& [id, c] : out_conns_) {
      if (c.established) enqueue(c, Heartbeat{opts_.me});
    }
  }

  void monitor(Clock::time_point now) {
    for (ServerId p : preds_) {
      if (suspected_.count(p)) continue;
      auto it = in_conns_.find(p);
      const bool silent = it == in_conns_.end() ? seconds(now - start_) > opts_.connect_grace
                                                : seconds(now - it->second.last_rx) > opts_.timeout;
      if (silent) suspect(p);
    }
  }

  void suspect(ServerId p) {
    if (!suspected_.insert(p).second) return;
    handle(server_->suspect(p));
  }

  void poll_once(long timeout_ms) {
    std::vector<pollfd> fds;
    std::vector<std::pair<int, ServerId>> who;  // 0 listener, 1 out, 2 in, 3 pending
    fds.push_back(pollfd{listen_fd_, POLLIN, 0});
    who.emplace_back(0, 0);
    for (auto& [id, c] : out_conns_) {
      if (c.fd < 0) continue;
      short ev = POLLIN;
      if (c.connecting || !c.outbuf.empty()) ev |= POLLOUT;
      fds.push_back(pollfd{c.fd, ev, 0});
      who.emplace_back(1, id);
    }
    for (auto& [id, c] : in_conns_) {
      if (c.fd < 0) continue;
      short ev = POLLIN;
      if (!c.outbuf.empty()) ev |= POLLOUT;
      fds.push_back(pollfd{c.fd, ev, 0});
      who.emplace_back(2, id);
    }
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      fds.push_back(pollfd{pending_[i].fd, POLLIN, 0});
      who.emplace_back(3, static_cast<ServerId>(i));
    }
    const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(std::clamp(timeout_ms, 0L, 50L)));
    if (rc <= 0) return;
    std::vector<std::size_t> accepted_done;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      const short re = fds[i].revents;
      if (!re) continue;
      const auto [kind, id] = who[i];
      if (kind == 0) {
        accept_all();
      } else if (kind == 1) {
        Conn& c = out_conns_.at(id);
        if (c.connecting) {
          int err = 0;
          socklen_t len = sizeof err;
          ::getsockopt(c.fd, SOL_SOCKET, SO_ERROR, &err, &len);
          if (err != 0) {
            retry_later(c, Clock::now());
            continue;
          }
          on_connected(c);
        }
        if (re & (POLLIN | POLLHUP | POLLERR)) read_from(c, id, false);
        if (c.fd >= 0 && (re & POLLOUT)) flush(c);
      } else if (kind == 2) {
        Conn& c = in_conns_.at(id);
        if (re & (POLLIN | POLLHUP | POLLERR)) read_from(c, id, true);
        if (c.fd >= 0 && (re & POLLOUT)) flush(c);
      } else {
        read_hello(id);
      }
    }
    std::erase_if(pending_, [](const Conn& c) { return c.fd < 0; });
  }

  void accept_all() {
    while (true) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) return;
      set_nonblocking(fd);
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      Conn c;
      c.fd = fd;
      c.established = true;
      c.last_rx = Clock::now();
      pending_.push_back(std::move(c));
    }
  }

  // Reads into `buf`; false on EOF or error.
  static bool drain(int fd, FrameReader& reader) {
    char buf[65536];
    while (true) {
      const ssize_t got = ::recv(fd, buf, sizeof buf, 0);
      if (got > 0) {
        reader.feed(std::string_view(buf, static_cast<std::size_t>(got)));
        continue;
      }
      if (got == 0) return false;
      return errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR;
    }
  }

  void read_hello(std::size_t index) {
    Conn& c = pending_[index];
    const bool open = drain(c.fd, c.reader);
    try {
      if (auto frame = c.reader.next()) {
        const auto* join = std::get_if<Join>(&*frame);
        if (!join || !preds_.count(join->id) || in_conns_.count(join->id)) {
          close_fd(c);
          return;
        }
        Conn& in = in_conns_[join->id];
        in = std::move(c);
        c.fd = -1;
        in.last_rx = Clock::now();
        process_frames(in, join->id, true);
        return;
      }
    } catch (const DecodeError&) {
      close_fd(c);
      return;
    }
    if (!open) close_fd(c);
  }

  void read_from(Conn& c, ServerId peer, bool from_predecessor) {
    const bool open = drain(c.fd, c.reader);
    c.last_rx = Clock::now();
    process_frames(c, peer, from_predecessor);
    if (!open) lost(c, peer, from_predecessor);
  }

  void process_frames(Conn& c, ServerId peer, bool from_predecessor) {
    try {
      while (c.fd >= 0) {
        auto frame = c.reader.next();
        if (!frame) break;
        auto msg = to_message(*frame);
        if (!msg || std::holds_alternative<Heartbeat>(*msg)) continue;
        // Bwd is the only message carried against the edge direction
        if (std::holds_alternative<Bwd>(*msg) == from_predecessor) continue;
        handle(server_->receive(peer, *msg));
      }
    } catch (const DecodeError&) {
      lost(c, peer, from_predecessor);
    }
  }

  void lost(Conn& c, ServerId peer, bool from_predecessor) {
    close_fd(c);
    c.dead = true;
    c.outbuf.clear();
    if (from_predecessor) suspect(peer);
  }

  void flush(Conn& c) {
    while (!c.outbuf.empty()) {
      const ssize_t sent = ::send(c.fd, c.outbuf.data(), c.outbuf.size(), MSG_NOSIGNAL);
      if (sent > 0) {
        c.outbuf.erase(0, static_cast<std::size_t>(sent));
        continue;
      }
      if (sent < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) return;
      close_fd(c);
      c.dead = true;
      c.outbuf.clear();
      return;
    }
  }

  void handle(const Effects& effects) {
    using Json = nlohmann::ordered_json;
    std::map<Round, Json> lines;
    for (const auto& eff : effects) {
      if (const auto* send = std::get_if<Send>(&eff)) {
        if (std::holds_alternative<Bwd>(send->msg)) {
          if (auto it = in_conns_.find(send->to); it != in_conns_.end()) enqueue(it->second, send->msg);
        } else if (auto it = out_conns_.find(send->to); it != out_conns_.end()) {
          enqueue(it->second, send->msg);
        }
      } else if (const auto* d = std::get_if<Deliver>(&eff)) {
        Json batch = Json::array();
        for (const auto& e : d->batch) batch.push_back(Json{{"origin", e.origin}, {"payload", e.payload}});
        lines[d->round] = Json{{"server", opts_.me}, {"round", d->round}, {"batch", batch}, {"tagged", Json::array()}};
      } else if (const auto* t = std::get_if<TaggedFailed>(&eff)) {
        lines[t->round]["tagged"] = t->servers;
      } else if (const auto* er = std::get_if<EnterRound>(&eff)) {
        emit(lines);
        if (opts_.crash_round && er->round == *opts_.crash_round) crash_now();
      }
    }
    emit(lines);
  }

  void emit(std::map<Round, nlohmann::ordered_json>& lines) {
    for (const auto& [round, line] : lines) out_ << line.dump() << "\n";
    if (!lines.empty()) out_.flush();
    lines.clear();
  }

  const NodeOptions& opts_;
  std::ostream& out_;
  std::shared_ptr<const Overlay> overlay_;
  Clock::time_point start_;
  std::optional<Server> server_;
  int listen_fd_ = -1;
  std::map<ServerId, Conn> out_conns_;
  std::map<ServerId, Conn> in_conns_;
  std::vector<Conn> pending_;
  std::set<ServerId> preds_;
  std::set<ServerId> suspected_;
};

}  // namespace

int run_node(const NodeOptions& opts, std::ostream& out) { return Node(opts, out).run(); }

}  // namespace allconcur
