#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>

#include "allconcur/analysis.hpp"
#include "allconcur/graph_io.hpp"
#include "allconcur/simnet.hpp"

namespace allconcur {

namespace {

// Fault-diameter estimates are expensive and sweeps verify many traces of
// the same overlay.
std::size_t cached_delta_hat(const Digraph& g, std::size_t f) {
  static std::mutex mu;
  static std::map<std::pair<std::string, std::size_t>, std::size_t> cache;
  auto key = std::pair{to_adjacency(g), f};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const std::size_t value = fault_diameter_estimate(g, f).delta_hat;
  std::lock_guard lock(mu);
  cache.emplace(std::move(key), value);
  return value;
}

std::size_t cached_connectivity(const Digraph& g) {
  static std::mutex mu;
  static std::map<std::string, std::size_t> cache;
  auto key = to_adjacency(g);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const std::size_t value = vertex_connectivity(g);
  std::lock_guard lock(mu);
  cache.emplace(std::move(key), value);
  return value;
}

class Check {
 public:
  explicit Check(std::string name, bool applicable = true) {
    v_.name = std::move(name);
    v_.applicable = applicable;
  }
  void fail(const std::string& why) {
    if (v_.pass) v_.detail = why;
    v_.pass = false;
  }
  void note(const std::string& text) {
    if (v_.pass) v_.detail = text;
  }
  Verdict done() {
    if (!v_.applicable) {
      v_.pass = true;
      v_.detail.clear();
    }
    return v_;
  }

 private:
  Verdict v_;
};

std::string sid(ServerId id) { return "p" + std::to_string(id); }
std::string rnd(Round r) { return "round " + std::to_string(r); }

std::size_t crashed_members(const Trace& t, const EpochInfo& e) {
  return static_cast<std::size_t>(
      std::count_if(e.members.begin(), e.members.end(), [&](ServerId id) { return t.crashed.count(id) != 0; }));
}

// Tarjan over dense vertices of `g` restricted to `alive`, skipping `cut` edges.
std::vector<int> components(const Digraph& g, const std::vector<bool>& alive,
                            const std::set<std::pair<Vertex, Vertex>>& cut) {
  const std::size_t n = g.size();
  std::vector<int> comp(n, -1), index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<Vertex> stack;
  int next_index = 0, next_comp = 0;
  std::function<void(Vertex)> visit = [&](Vertex v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (Vertex w : g.successors(v)) {
      if (!alive[w] || cut.count({v, w})) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      Vertex w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = next_comp;
      } while (w != v);
      ++next_comp;
    }
  };
  for (Vertex v = 0; v < n; ++v) {
    if (alive[v] && index[v] < 0) visit(v);
  }
  return comp;
}

}  // namespace

bool Verdicts::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict& Verdicts::get(const std::string& name) const {
  for (const auto& v : items) {
    if (v.name == name) return v;
  }
  throw std::out_of_range("no verdict named " + name);
}

std::string Verdicts::summary() const {
  std::ostringstream out;
  for (const auto& v : items) {
    out << (v.applicable ? (v.pass ? "PASS " : "FAIL ") : "N/A  ") << v.name;
    if (!v.detail.empty()) out << ": " << v.detail;
    out << "\n";
  }
  return out.str();
}

Verdicts verify(const Trace& t) {
  Verdicts out;

  {
    Check c("integrity");
    for (const auto& [round, per_server] : t.stats) {
      for (const auto& [id, s] : per_server) {
        if (s.deliveries > 1) c.fail(sid(id) + " delivered " + rnd(round) + " " + std::to_string(s.deliveries) + " times");
        for (std::size_t i = 0; i < s.batch.size(); ++i) {
          const auto& e = s.batch[i];
          if (i && s.batch[i - 1].origin >= e.origin) c.fail(sid(id) + " delivered a repeated or unordered origin");
          auto it = t.broadcasts.find({round, e.origin});
          if (it == t.broadcasts.end()) {
            c.fail(sid(id) + " delivered a message " + sid(e.origin) + " never broadcast in " + rnd(round));
          } else if (it->second != e.payload) {
            c.fail(sid(id) + " delivered a corrupted message from " + sid(e.origin));
          }
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("agreement");
    for (const auto& [round, per_server] : t.stats) {
      const std::vector<DeliveredEntry>* ref = nullptr;
      ServerId ref_id = 0;
      for (const auto& [id, s] : per_server) {
        if (!s.delivered || t.crashed.count(id)) continue;
        if (!ref) {
          ref = &s.batch;
          ref_id = id;
        } else if (*ref != s.batch) {
          c.fail(sid(ref_id) + " and " + sid(id) + " delivered different sets in " + rnd(round));
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("total_order");
    for (const auto& [round, per_server] : t.stats) {
      std::vector<std::pair<ServerId, const std::vector<DeliveredEntry>*>> all;
      for (const auto& [id, s] : per_server) {
        if (s.delivered) all.emplace_back(id, &s.batch);
      }
      for (std::size_t a = 0; a < all.size(); ++a) {
        for (std::size_t b = a + 1; b < all.size(); ++b) {
          std::vector<ServerId> common_a, common_b;
          std::set<ServerId> in_b;
          for (const auto& e : *all[b].second) in_b.insert(e.origin);
          std::set<ServerId> in_a;
          for (const auto& e : *all[a].second) {
            in_a.insert(e.origin);
            if (in_b.count(e.origin)) common_a.push_back(e.origin);
          }
          for (const auto& e : *all[b].second) {
            if (in_a.count(e.origin)) common_b.push_back(e.origin);
          }
          if (common_a != common_b) {
            c.fail(sid(all[a].first) + " and " + sid(all[b].first) + " ordered " + rnd(round) + " differently");
          }
        }
      }
    }
    out.items.push_back(c.done());
  }

  const auto first = t.epochs.find(1);
  const std::size_t k1 = first == t.epochs.end() ? 0 : cached_connectivity(first->second.graph);
  const bool perfect = t.mode == FdMode::Perfect;
  const bool no_cuts = t.cut_edges.empty();
  const bool constant_delay = t.delay.kind == DelayModel::Kind::Constant;

  {
    Check c("validity", perfect && no_cuts && t.false_suspicions == 0 && t.crashed.size() < k1);
    for (Round r = 1; r <= t.rounds; ++r) {
      auto ep = t.epochs.find(r);
      if (ep == t.epochs.end()) {
        c.fail("no server reached " + rnd(r));
        continue;
      }
      for (ServerId id : ep->second.members) {
        if (t.crashed.count(id)) continue;
        const RoundStats* s = nullptr;
        if (auto it = t.stats.find(r); it != t.stats.end()) {
          if (auto jt = it->second.find(id); jt != it->second.end()) s = &jt->second;
        }
        if (!s || !s->delivered) {
          c.fail(sid(id) + " never delivered " + rnd(r));
          continue;
        }
        for (ServerId origin : ep->second.members) {
          if (t.crashed.count(origin)) continue;
          const bool has = std::any_of(s->batch.begin(), s->batch.end(), [&](const auto& e) { return e.origin == origin; });
          if (!has) c.fail(sid(id) + " delivered " + rnd(r) + " without the message of " + sid(origin));
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("depth_bound", perfect && no_cuts && constant_delay && t.overhead == 0);
    if (perfect && no_cuts && constant_delay && t.overhead == 0) {
      std::uint32_t worst = 0;
      for (const auto& [round, ep] : t.epochs) {
        const std::size_t f = crashed_members(t, ep);
        const std::size_t k = cached_connectivity(ep.graph);
        if (f >= k) continue;
        const std::size_t bound = f + cached_delta_hat(ep.graph, f);
        auto it = t.stats.find(round);
        if (it == t.stats.end()) continue;
        for (const auto& [id, s] : it->second) {
          if (!s.delivered) continue;
          worst = std::max(worst, s.depth_hops);
          if (s.depth_hops > bound) {
            c.fail(sid(id) + " needed depth " + std::to_string(s.depth_hops) + " > " + std::to_string(bound) + " in " +
                   rnd(round));
          }
        }
      }
      c.note("max depth " + std::to_string(worst));
    }
    out.items.push_back(c.done());
  }

  {
    Check c("bcast_bound");
    for (const auto& [round, per_server] : t.stats) {
      auto ep = t.epochs.find(round);
      if (ep == t.epochs.end()) continue;
      const std::size_t bound = ep->second.members.size() * ep->second.graph.max_degree();
      for (const auto& [id, s] : per_server) {
        if (s.bcast_recv > bound) {
          c.fail(sid(id) + " received " + std::to_string(s.bcast_recv) + " > " + std::to_string(bound) + " bcasts in " +
                 rnd(round));
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("foreign_bcast_exact", t.crashed.empty() && no_cuts && t.false_suspicions == 0);
    if (t.crashed.empty() && no_cuts && t.false_suspicions == 0) {
      for (const auto& [round, ep] : t.epochs) {
        auto it = t.stats.find(round);
        for (std::size_t v = 0; v < ep.members.size(); ++v) {
          const ServerId id = ep.members[v];
          const std::uint64_t expect = (ep.members.size() - 1) * ep.graph.in_degree(static_cast<Vertex>(v));
          std::uint64_t got = 0;
          if (it != t.stats.end()) {
            if (auto jt = it->second.find(id); jt != it->second.end()) got = jt->second.foreign_bcast_recv;
          }
          if (got != expect) {
            c.fail(sid(id) + " received " + std::to_string(got) + " foreign bcasts in " + rnd(round) + ", expected " +
                   std::to_string(expect));
          }
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("fail_bound", perfect && t.false_suspicions == 0 && no_cuts);
    if (perfect && t.false_suspicions == 0 && no_cuts) {
      for (const auto& [round, per_server] : t.stats) {
        auto ep = t.epochs.find(round);
        if (ep == t.epochs.end()) continue;
        const std::size_t f = crashed_members(t, ep->second);
        const std::size_t d = ep->second.graph.max_degree();
        for (const auto& [id, s] : per_server) {
          if (s.fail_recv > f * d * d) {
            c.fail(sid(id) + " received " + std::to_string(s.fail_recv) + " > " + std::to_string(f * d * d) +
                   " failure notifications in " + rnd(round));
          }
        }
      }
    }
    out.items.push_back(c.done());
  }

  {
    Check c("partition", !no_cuts && first != t.epochs.end());
    if (!no_cuts && first != t.epochs.end()) {
      const EpochInfo& ep = first->second;
      std::vector<bool> alive(ep.members.size());
      std::map<ServerId, Vertex> pos;
      for (Vertex v = 0; v < ep.members.size(); ++v) {
        pos[ep.members[v]] = v;
        alive[v] = !t.crashed.count(ep.members[v]);
      }
      std::set<std::pair<Vertex, Vertex>> cut;
      for (const auto& [from, to] : t.cut_edges) {
        if (!pos.count(from) || !pos.count(to)) continue;
        cut.insert({pos[from], pos[to]});
        cut.insert({pos[to], pos[from]});
      }
      const auto comp = components(ep.graph, alive, cut);
      for (const auto& [round, per_server] : t.stats) {
        std::set<int> seen;
        for (const auto& [id, s] : per_server) {
          if (!s.delivered || t.crashed.count(id) || !pos.count(id)) continue;
          seen.insert(comp[pos[id]]);
        }
        if (seen.size() > 1) c.fail(std::to_string(seen.size()) + " components delivered " + rnd(round));
      }
    }
    out.items.push_back(c.done());
  }
  return out;
}

}  // namespace allconcur
