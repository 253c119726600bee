#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "allconcur/digraph.hpp"

namespace allconcur {

using ServerId = std::uint32_t;
using Round = std::uint32_t;
/// Opaque application bytes.
using Payload = std::string;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- messages ----

struct Bcast {
  Round round = 0;
  ServerId origin = 0;
  Payload payload;
  friend bool operator==(const Bcast&, const Bcast&) = default;
};

/// `detector` suspects its predecessor `failed`.
struct Fail {
  Round round = 0;
  ServerId failed = 0;
  ServerId detector = 0;
  friend bool operator==(const Fail&, const Fail&) = default;
};

/// Partition probe R-broadcast along the overlay once `origin` has decided.
struct Fwd {
  Round round = 0;
  ServerId origin = 0;
  friend bool operator==(const Fwd&, const Fwd&) = default;
};

/// Partition probe R-broadcast along the transposed overlay.
struct Bwd {
  Round round = 0;
  ServerId origin = 0;
  friend bool operator==(const Bwd&, const Bwd&) = default;
};

/// Failure-detector liveness beacon; never interpreted by Server.
struct Heartbeat {
  ServerId from = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

using Message = std::variant<Bcast, Fail, Fwd, Bwd, Heartbeat>;

Round round_of(const Message& msg);
std::string describe(const Message& msg);

// ---- effects ----

struct DeliveredEntry {
  ServerId origin = 0;
  Payload payload;
  friend bool operator==(const DeliveredEntry&, const DeliveredEntry&) = default;
};

struct Send {
  ServerId to = 0;
  Message msg;
};

struct Deliver {
  Round round = 0;
  std::vector<DeliveredEntry> batch;  // ascending origin
};

struct TaggedFailed {
  Round round = 0;
  std::vector<ServerId> servers;
};

/// Emitted after a round ends and the next one has been set up (before any
/// buffered message is replayed). Not emitted once the last round is done.
struct EnterRound {
  Round round = 0;
  std::vector<ServerId> members;
  std::shared_ptr<const class Overlay> overlay;
};

struct Diagnostic {
  std::string text;
};

using Effect = std::variant<Send, Deliver, TaggedFailed, EnterRound, Diagnostic>;
using Effects = std::vector<Effect>;

// ---- membership ----

/// Membership of one configuration epoch: sorted server ids mapped onto the
/// vertices of an overlay digraph (vertex i is members()[i]).
class Overlay {
 public:
  Overlay(std::vector<ServerId> members, Digraph graph);

  static std::shared_ptr<const Overlay> dense(Digraph graph);

  std::size_t size() const { return members_.size(); }
  const std::vector<ServerId>& members() const { return members_; }
  const Digraph& graph() const { return graph_; }
  bool contains(ServerId id) const;
  /// Vertex of `id`; throws ProtocolError for non-members.
  Vertex position(ServerId id) const;
  ServerId id_at(Vertex v) const { return members_.at(v); }

  const std::vector<ServerId>& successors(ServerId id) const { return succ_.at(position(id)); }
  const std::vector<ServerId>& predecessors(ServerId id) const { return pred_.at(position(id)); }
  bool is_successor(ServerId from, ServerId to) const;

 private:
  std::vector<ServerId> members_;
  Digraph graph_;
  std::vector<std::vector<ServerId>> succ_;
  std::vector<std::vector<ServerId>> pred_;
};

struct MembershipPolicy {
  enum class Kind { Prune, Rebuild };
  /// Prune keeps the surviving part of the current overlay. Rebuild builds a
  /// fresh overlay of `graph` kind; it is also used whenever servers join.
  Kind kind = Kind::Prune;
  GraphKind graph = GraphKind::Gs;
  std::size_t degree = 3;
};

/// Overlay for the next epoch. Rebuild uses G_S(n', degree) when n' >= 2d and
/// the complete digraph otherwise; binomial needs n' >= 3. Throws
/// ProtocolError when fewer than two members remain.
std::shared_ptr<const Overlay> next_overlay(const Overlay& current, const std::vector<ServerId>& removed,
                                            const std::vector<ServerId>& joined, const MembershipPolicy& policy);

/// Join requests travel as ordinary payloads.
Payload join_request(ServerId id);
std::optional<ServerId> parse_join(const Payload& payload);

// ---- tracking ----

/// Servers that may hold one origin's message, with edges recording who may
/// have received it from whom.
class TrackingDigraph {
 public:
  using Edge = std::pair<ServerId, ServerId>;

  bool empty() const { return vertices_.empty(); }
  const std::set<ServerId>& vertices() const { return vertices_; }
  const std::set<Edge>& edges() const { return edges_; }

  void reset(ServerId origin);
  void clear();
  bool has_vertex(ServerId v) const { return vertices_.count(v) != 0; }
  void add_vertex(ServerId v) { vertices_.insert(v); }
  bool has_edge(ServerId u, ServerId v) const { return edges_.count({u, v}) != 0; }
  void add_edge(ServerId u, ServerId v);
  void remove_edge(ServerId u, ServerId v) { edges_.erase({u, v}); }
  bool has_successors(ServerId u) const;
  /// Drops every vertex (and its edges) not reachable from `origin`.
  void prune_unreachable(ServerId origin);

  friend bool operator==(const TrackingDigraph&, const TrackingDigraph&) = default;

 private:
  std::set<ServerId> vertices_;
  std::set<Edge> edges_;
};

// ---- server ----

enum class FdMode { Perfect, Eventual };

std::string to_string(FdMode mode);
FdMode parse_fd_mode(const std::string& text);

struct ServerConfig {
  ServerId me = 0;
  std::shared_ptr<const Overlay> overlay;
  FdMode mode = FdMode::Perfect;
  MembershipPolicy policy;
  /// Stop after delivering this round (inclusive). Unbounded when unset.
  std::optional<Round> max_rounds;
  /// Broadcast the staged (or empty) payload as soon as a round begins.
  bool eager_start = false;
  /// First round; later than 1 for servers that join a running system.
  Round first_round = 1;
};

/// One AllConcur server. Inputs are method calls, outputs are returned
/// effects; the class performs no I/O and is copyable.
class Server {
 public:
  explicit Server(ServerConfig config);

  // inputs

  /// Payload this server A-broadcasts in `round` when triggered.
  void stage(Round round, Payload payload);
  /// A-broadcast the staged payload for the current round if not done yet.
  Effects start();
  /// A-broadcast an explicit payload; throws when already done this round.
  Effects a_broadcast(Payload payload);
  /// A message arriving over the link from `from`.
  Effects receive(ServerId from, const Message& msg);
  /// Local failure detector suspects predecessor `pred`.
  Effects suspect(ServerId pred);

  // message handlers, current-round messages only (receive() routes here)

  Effects handle_bcast(const Bcast& msg);
  Effects handle_fail(const Fail& note);
  Effects handle_fwd(const Fwd& probe);
  Effects handle_bwd(const Bwd& probe);
  Effects check_termination();

  // inspectors

  ServerId id() const { return cfg_.me; }
  Round round() const { return round_; }
  FdMode mode() const { return cfg_.mode; }
  bool finished() const { return finished_; }
  bool broadcast_done() const { return cur_.broadcast_done; }
  bool decided() const { return cur_.decided; }
  const Overlay& overlay() const { return *overlay_; }
  std::shared_ptr<const Overlay> overlay_ptr() const { return overlay_; }
  const std::map<ServerId, Payload>& known() const { return cur_.known; }
  const std::set<std::pair<ServerId, ServerId>>& fails() const { return cur_.fails; }
  const TrackingDigraph& tracking(ServerId origin) const;
  const std::set<ServerId>& suspected() const { return suspected_; }
  const std::set<ServerId>& tagged() const { return tagged_; }
  const std::set<ServerId>& fwd_from() const { return cur_.fwd_from; }
  const std::set<ServerId>& bwd_from() const { return cur_.bwd_from; }
  std::size_t buffered() const { return buffered_.size(); }

  /// True when receive(from, msg) would change nothing and emit nothing.
  bool is_noop(ServerId from, const Message& msg) const;

  /// Canonical encoding of all mutable state (configuration excluded).
  void fingerprint(std::string& out) const;

 private:
  struct RoundState {
    std::map<ServerId, Payload> known;
    std::set<std::pair<ServerId, ServerId>> fails;
    std::set<ServerId> failed_known;
    std::map<ServerId, TrackingDigraph> tracking;
    std::set<ServerId> sent;
    bool broadcast_done = false;
    bool decided = false;
    std::set<ServerId> fwd_from;
    std::set<ServerId> bwd_from;
  };

  // relaying duties kept for the round just finished
  struct PreviousRound {
    std::shared_ptr<const Overlay> overlay;
    std::set<std::pair<ServerId, ServerId>> fails_seen;
    std::set<ServerId> fwd_seen;
    std::set<ServerId> bwd_seen;
  };

  void reset_round();
  void send_to_successors(const Message& msg, Effects& out) const;
  void send_to_predecessors(const Message& msg, Effects& out) const;
  Effects broadcast_own(Payload payload);
  void disseminate(Effects& out);
  void update_tracking(const Fail& note);
  void try_deliver(Effects& out);
  void finish_round(Effects& out);
  Effects relay_previous(const Message& msg);
  Payload staged_payload() const;

  ServerConfig cfg_;
  std::shared_ptr<const Overlay> overlay_;
  Round round_ = 1;
  bool finished_ = false;
  RoundState cur_;
  std::optional<PreviousRound> prev_;
  std::set<ServerId> suspected_;
  std::set<ServerId> tagged_;
  std::vector<std::pair<ServerId, Message>> buffered_;
  std::map<Round, Payload> staged_;
};

}  // namespace allconcur
