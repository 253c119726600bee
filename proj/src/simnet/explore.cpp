#include <algorithm>
#include <deque>
#include <type_traits>
#include <functional>
#include <unordered_set>

#include "allconcur/analysis.hpp"
#include "allconcur/simnet.hpp"

namespace allconcur {

namespace {

struct Hash128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool operator==(const Hash128&) const = default;
};

struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const { return static_cast<std::size_t>(h.lo ^ (h.hi * 0x9E3779B97F4A7C15ULL)); }
};

Hash128 hash_bytes(const std::string& bytes) {
  std::uint64_t fnv = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    fnv ^= c;
    fnv *= 1099511628211ULL;
  }
  return Hash128{std::hash<std::string>{}(bytes), fnv};
}

using Link = std::pair<ServerId, ServerId>;

struct State {
  std::vector<Server> servers;
  std::vector<bool> crashed;
  std::map<Link, std::deque<Message>> links;
  /// (crashed predecessor, monitoring server) suspicions not yet raised
  std::set<Link> pending_suspicions;
  std::vector<std::optional<std::vector<DeliveredEntry>>> delivered;
  std::vector<std::uint32_t> deliveries;
  std::size_t crashes = 0;
};

void put(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }

void put_message(std::string& out, const Message& msg) {
  out.push_back(static_cast<char>(msg.index()));
  std::visit([&](const auto& m) {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, Bcast>) {
      put(out, m.round);
      put(out, m.origin);
    } else if constexpr (std::is_same_v<T, Fail>) {
      put(out, m.round);
      put(out, m.failed);
      put(out, m.detector);
    } else if constexpr (std::is_same_v<T, Heartbeat>) {
      put(out, m.from);
    } else {
      put(out, m.round);
      put(out, m.origin);
    }
  }, msg);
}

// Deadlock-preserving stubborn-set search. Crash victims are fixed per pass
// so that a crash is a local step of its victim; steps of distinct servers
// then commute, and a server's steps only wait on its predecessors.
class Explorer {
 public:
  Explorer(const ExploreOptions& opts, Digraph g) : opts_(opts), overlay_(Overlay::dense(std::move(g))) {}

  ExploreResult run() {
    const std::size_t n = overlay_->size();
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(opts_.f), true);
    // every victim set of size f; each victim may also never crash
    do {
      victims_ = pick;
      seen_.clear();
      State init;
      for (ServerId i = 0; i < n; ++i) {
        ServerConfig cfg;
        cfg.me = i;
        cfg.overlay = overlay_;
        cfg.max_rounds = 1;
        init.servers.emplace_back(cfg);
        init.servers.back().stage(1, payload(i));
      }
      init.crashed.assign(n, false);
      init.delivered.resize(n);
      init.deliveries.assign(n, 0);
      visit(std::move(init));
    } while (!result_.partial && std::prev_permutation(pick.begin(), pick.end()));
    return result_;
  }

 private:
  static Payload payload(ServerId i) { return "m" + std::to_string(i); }

  Hash128 hash_state(const State& s) const {
    std::string bytes;
    for (std::size_t i = 0; i < s.servers.size(); ++i) {
      bytes.push_back(s.crashed[i] ? 'X' : 'A');
      s.servers[i].fingerprint(bytes);
      put(bytes, s.deliveries[i]);
    }
    for (const auto& [link, queue] : s.links) {
      if (queue.empty()) continue;
      put(bytes, link.first);
      put(bytes, link.second);
      put(bytes, static_cast<std::uint32_t>(queue.size()));
      for (const auto& m : queue) put_message(bytes, m);
    }
    bytes.push_back('|');
    for (const auto& [u, v] : s.pending_suspicions) {
      put(bytes, u);
      put(bytes, v);
    }
    return hash_bytes(bytes);
  }

  bool can_crash(const State& s, ServerId i) const {
    return victims_[i] && !s.crashed[i] && !s.servers[i].finished();
  }

  bool can_send(const State& s, ServerId i) const { return !s.crashed[i] && !s.servers[i].finished(); }

  // Whether `from` may later send `to` something `to` would not ignore. Noop
  // status is monotone within a round, so anything else can be disregarded.
  bool may_still_send(const State& s, ServerId from, ServerId to) const {
    const Server& src = s.servers[from];
    const Server& dst = s.servers[to];
    if (!can_send(s, from) || dst.finished()) return false;
    if (!dst.decided()) {
      for (ServerId o : overlay_->members()) {
        if (!src.known().count(o) && !dst.known().count(o)) return true;
      }
    }
    for (ServerId v = 0; v < s.servers.size(); ++v) {
      if (!victims_[v]) continue;
      for (ServerId succ : overlay_->successors(v)) {
        if (!src.fails().count({v, succ}) && !dst.fails().count({v, succ})) return true;
      }
    }
    return false;
  }

  bool link_empty(const State& s, ServerId from, ServerId to) const {
    auto it = s.links.find({from, to});
    return it == s.links.end() || it->second.empty();
  }

  std::size_t enabled_count(const State& s, ServerId i) const {
    if (s.crashed[i]) return 0;
    std::size_t count = 0;
    if (!s.servers[i].broadcast_done() && !s.servers[i].finished()) ++count;
    for (ServerId p : overlay_->predecessors(i)) {
      if (!link_empty(s, p, i)) ++count;
      if (s.pending_suspicions.count({p, i})) ++count;
    }
    if (can_crash(s, i)) ++count;
    return count;
  }

  // Servers whose steps must be explored together with those of `seed`.
  std::vector<ServerId> closure(const State& s, ServerId seed) const {
    std::vector<bool> in(s.servers.size(), false);
    std::vector<ServerId> out{seed};
    in[seed] = true;
    for (std::size_t at = 0; at < out.size(); ++at) {
      const ServerId i = out[at];
      if (s.crashed[i]) continue;
      for (ServerId p : overlay_->predecessors(i)) {
        if (in[p]) continue;
        const bool may_send = link_empty(s, p, i) && may_still_send(s, p, i);
        const bool may_be_suspected = victims_[p] && !s.crashed[p];
        if (may_send || may_be_suspected) {
          in[p] = true;
          out.push_back(p);
        }
      }
    }
    return out;
  }

  void visit(State s) {
    if (result_.partial) return;
    normalize(s);
    if (!seen_.insert(hash_state(s)).second) return;
    ++result_.states;
    if (result_.states >= opts_.state_cap) {
      result_.partial = true;
      return;
    }
    const std::size_t n = s.servers.size();

    std::vector<ServerId> best;
    std::size_t best_enabled = 0;
    for (ServerId i = 0; i < n; ++i) {
      if (enabled_count(s, i) == 0) continue;
      auto set = closure(s, i);
      std::size_t enabled = 0;
      for (ServerId j : set) enabled += enabled_count(s, j);
      if (best.empty() || enabled < best_enabled) {
        best = std::move(set);
        best_enabled = enabled;
      }
    }
    if (best.empty()) {
      terminal(s);
      return;
    }

    auto step = [&](ServerId i, const std::function<Effects(State&)>& act) {
      State base = s;
      const Effects eff = act(base);
      if (can_crash(s, i)) {
        for (std::size_t cut = 0; cut <= eff.size(); ++cut) {
          if (cut > 0 && !std::holds_alternative<Send>(eff[cut - 1])) continue;
          State next = base;
          apply(next, i, eff, cut);
          crash(next, i);
          visit(std::move(next));
        }
      }
      apply(base, i, eff, eff.size());
      visit(std::move(base));
    };

    for (ServerId i : best) {
      if (s.crashed[i]) continue;
      if (!s.servers[i].broadcast_done() && !s.servers[i].finished()) {
        step(i, [i](State& st) { return st.servers[i].start(); });
      }
      for (ServerId from : overlay_->predecessors(i)) {
        if (!link_empty(s, from, i)) {
          step(i, [from, i](State& st) {
            auto& q = st.links[{from, i}];
            Message msg = std::move(q.front());
            q.pop_front();
            return st.servers[i].receive(from, msg);
          });
        }
        if (s.pending_suspicions.count({from, i})) {
          step(i, [from, i](State& st) {
            st.pending_suspicions.erase({from, i});
            return st.servers[i].suspect(from);
          });
        }
      }
      if (can_crash(s, i)) {
        State next = s;
        crash(next, i);
        visit(std::move(next));
      }
    }
  }

  // Drops deliveries that cannot change anything.
  void normalize(State& s) const {
    for (auto& [link, queue] : s.links) {
      const auto [from, to] = link;
      if (s.crashed[to]) {
        queue.clear();
        continue;
      }
      while (!queue.empty() && s.servers[to].is_noop(from, queue.front())) queue.pop_front();
    }
    std::erase_if(s.pending_suspicions, [&](const Link& l) { return s.crashed[l.second]; });
  }

  void apply(State& s, ServerId i, const Effects& eff, std::size_t upto) const {
    for (std::size_t j = 0; j < upto; ++j) {
      if (const auto* send = std::get_if<Send>(&eff[j])) {
        s.links[{i, send->to}].push_back(send->msg);
      } else if (const auto* d = std::get_if<Deliver>(&eff[j])) {
        ++s.deliveries[i];
        if (!s.delivered[i]) s.delivered[i] = d->batch;
      }
    }
  }

  void crash(State& s, ServerId i) const {
    s.crashed[i] = true;
    ++s.crashes;
    for (ServerId succ : overlay_->successors(i)) {
      if (!s.crashed[succ]) s.pending_suspicions.insert({i, succ});
    }
    for (auto& [link, queue] : s.links) {
      if (link.second == i) queue.clear();
    }
  }

  void terminal(const State& s) {
    ++result_.executions;
    const std::size_t n = s.servers.size();
    auto flag = [&](std::uint64_t& counter, const std::string& what) {
      if (counter++ == 0 && result_.first_violation.empty()) result_.first_violation = what;
    };
    const std::vector<DeliveredEntry>* ref = nullptr;
    for (ServerId i = 0; i < n; ++i) {
      if (s.deliveries[i] > 1) flag(result_.integrity_violations, "p" + std::to_string(i) + " delivered twice");
      if (s.delivered[i]) {
        const auto& batch = *s.delivered[i];
        for (std::size_t j = 0; j < batch.size(); ++j) {
          if (batch[j].payload != payload(batch[j].origin)) {
            flag(result_.integrity_violations, "p" + std::to_string(i) + " delivered a forged message");
          }
          if (j && batch[j - 1].origin >= batch[j].origin) {
            flag(result_.order_violations, "p" + std::to_string(i) + " delivered out of order");
          }
        }
        // uniform: servers that delivered before crashing must agree too
        if (!ref) {
          ref = &batch;
        } else if (*ref != batch) {
          flag(result_.agreement_violations, "p" + std::to_string(i) + " disagrees");
        }
      } else if (!s.crashed[i]) {
        flag(result_.liveness_violations, "p" + std::to_string(i) + " never delivered");
      }
    }
  }

  const ExploreOptions& opts_;
  std::shared_ptr<const Overlay> overlay_;
  std::vector<bool> victims_;
  std::unordered_set<Hash128, Hash128Hasher> seen_;
  ExploreResult result_;
};

}  // namespace

ExploreResult explore(const ExploreOptions& opts) {
  Digraph g = opts.graph ? *opts.graph : build_complete(opts.n);
  if (g.size() > 5) throw ScenarioError("exhaustive exploration is limited to n <= 5");
  const std::size_t k = vertex_connectivity(g);
  if (opts.f >= k) {
    throw ScenarioError("f = " + std::to_string(opts.f) + " is not below the connectivity " + std::to_string(k));
  }
  return Explorer(opts, std::move(g)).run();
}

}  // namespace allconcur
