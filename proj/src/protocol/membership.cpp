#include <algorithm>
#include <charconv>
#include <deque>

#include "allconcur/protocol.hpp"

namespace allconcur {

Round round_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> Round {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Heartbeat>) {
          return 0;
        } else {
          return m.round;
        }
      },
      msg);
}

std::string describe(const Message& msg) {
  struct Visitor {
    std::string operator()(const Bcast& m) const {
      return "BCAST(r" + std::to_string(m.round) + ",p" + std::to_string(m.origin) + ")";
    }
    std::string operator()(const Fail& m) const {
      return "FAIL(r" + std::to_string(m.round) + ",p" + std::to_string(m.failed) + " by p" + std::to_string(m.detector) +
             ")";
    }
    std::string operator()(const Fwd& m) const {
      return "FWD(r" + std::to_string(m.round) + ",p" + std::to_string(m.origin) + ")";
    }
    std::string operator()(const Bwd& m) const {
      return "BWD(r" + std::to_string(m.round) + ",p" + std::to_string(m.origin) + ")";
    }
    std::string operator()(const Heartbeat& m) const { return "HB(p" + std::to_string(m.from) + ")"; }
  };
  return std::visit(Visitor{}, msg);
}

Overlay::Overlay(std::vector<ServerId> members, Digraph graph) : members_(std::move(members)), graph_(std::move(graph)) {
  if (!std::is_sorted(members_.begin(), members_.end()) ||
      std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw ProtocolError("overlay members must be sorted and distinct");
  }
  if (members_.size() != graph_.size()) throw ProtocolError("overlay member count does not match digraph size");
  if (!graph_.is_simple()) throw ProtocolError("overlay digraph must be simple");
  succ_.resize(members_.size());
  pred_.resize(members_.size());
  for (Vertex v = 0; v < graph_.size(); ++v) {
    for (Vertex w : graph_.successors(v)) succ_[v].push_back(members_[w]);
    for (Vertex w : graph_.predecessors(v)) pred_[v].push_back(members_[w]);
    std::sort(succ_[v].begin(), succ_[v].end());
    std::sort(pred_[v].begin(), pred_[v].end());
  }
}

std::shared_ptr<const Overlay> Overlay::dense(Digraph graph) {
  std::vector<ServerId> ids(graph.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ServerId>(i);
  return std::make_shared<const Overlay>(std::move(ids), std::move(graph));
}

bool Overlay::contains(ServerId id) const { return std::binary_search(members_.begin(), members_.end(), id); }

Vertex Overlay::position(ServerId id) const {
  auto it = std::lower_bound(members_.begin(), members_.end(), id);
  if (it == members_.end() || *it != id) throw ProtocolError("server " + std::to_string(id) + " is not a member");
  return static_cast<Vertex>(it - members_.begin());
}

bool Overlay::is_successor(ServerId from, ServerId to) const {
  const auto& s = successors(from);
  return std::binary_search(s.begin(), s.end(), to);
}

std::shared_ptr<const Overlay> next_overlay(const Overlay& current, const std::vector<ServerId>& removed,
                                            const std::vector<ServerId>& joined, const MembershipPolicy& policy) {
  std::vector<ServerId> members;
  for (ServerId id : current.members()) {
    if (std::find(removed.begin(), removed.end(), id) == removed.end()) members.push_back(id);
  }
  for (ServerId id : joined) members.push_back(id);
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.size() < 2) throw ProtocolError("membership would shrink below two servers");

  const std::size_t n = members.size();
  if (joined.empty() && policy.kind == MembershipPolicy::Kind::Prune) {
    Digraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (ServerId s : current.successors(members[i])) {
        auto it = std::lower_bound(members.begin(), members.end(), s);
        if (it != members.end() && *it == s) g.add_edge(static_cast<Vertex>(i), static_cast<Vertex>(it - members.begin()));
      }
    }
    return std::make_shared<const Overlay>(std::move(members), std::move(g));
  }

  Digraph g;
  switch (policy.graph) {
    case GraphKind::Gs:
      g = (policy.degree >= 3 && n >= 2 * policy.degree) ? build_gs(n, policy.degree) : build_complete(n);
      break;
    case GraphKind::Binomial:
      g = n >= 3 ? build_binomial(n) : build_complete(n);
      break;
    case GraphKind::Complete:
      g = build_complete(n);
      break;
  }
  return std::make_shared<const Overlay>(std::move(members), std::move(g));
}

namespace {
constexpr std::string_view kJoinPrefix = "allconcur-join:";
}

Payload join_request(ServerId id) { return std::string(kJoinPrefix) + std::to_string(id); }

std::optional<ServerId> parse_join(const Payload& payload) {
  if (payload.size() <= kJoinPrefix.size() || payload.compare(0, kJoinPrefix.size(), kJoinPrefix) != 0) return std::nullopt;
  ServerId id = 0;
  const char* first = payload.data() + kJoinPrefix.size();
  const char* last = payload.data() + payload.size();
  auto [ptr, ec] = std::from_chars(first, last, id);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return id;
}

void TrackingDigraph::reset(ServerId origin) {
  vertices_ = {origin};
  edges_.clear();
}

void TrackingDigraph::clear() {
  vertices_.clear();
  edges_.clear();
}

void TrackingDigraph::add_edge(ServerId u, ServerId v) {
  vertices_.insert(u);
  vertices_.insert(v);
  edges_.insert({u, v});
}

bool TrackingDigraph::has_successors(ServerId u) const {
  auto it = edges_.lower_bound({u, 0});
  return it != edges_.end() && it->first == u;
}

void TrackingDigraph::prune_unreachable(ServerId origin) {
  std::set<ServerId> reached;
  if (has_vertex(origin)) {
    std::deque<ServerId> queue{origin};
    reached.insert(origin);
    while (!queue.empty()) {
      const ServerId u = queue.front();
      queue.pop_front();
      for (auto it = edges_.lower_bound({u, 0}); it != edges_.end() && it->first == u; ++it) {
        if (reached.insert(it->second).second) queue.push_back(it->second);
      }
    }
  }
  vertices_ = std::move(reached);
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (!vertices_.count(it->first) || !vertices_.count(it->second)) {
      it = edges_.erase(it);
    } else {
      ++it;
    }
  }
}

std::string to_string(FdMode mode) { return mode == FdMode::Perfect ? "perfect" : "eventual"; }

FdMode parse_fd_mode(const std::string& text) {
  if (text == "perfect" || text == "P") return FdMode::Perfect;
  if (text == "eventual" || text == "eventually-perfect" || text == "<>P") return FdMode::Eventual;
  throw ProtocolError("unknown failure detector mode '" + text + "'");
}

}  // namespace allconcur
