#include "flow.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <utility>

#include "allconcur/analysis.hpp"

namespace allconcur {

namespace detail {

void FlowNetwork::add_arc(std::uint32_t from, std::uint32_t to, std::int32_t cap, std::int32_t cost) {
  const auto fwd_index = static_cast<std::uint32_t>(adj_[from].size());
  const auto rev_index = static_cast<std::uint32_t>(adj_[to].size() + (from == to ? 1 : 0));
  adj_[from].push_back(Arc{to, rev_index, cap, cost, true});
  adj_[to].push_back(Arc{from, fwd_index, 0, -cost, false});
}

std::int32_t FlowNetwork::max_flow(std::uint32_t s, std::uint32_t t, std::int32_t limit) {
  std::int32_t total = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> parent(adj_.size());
  while (total < limit) {
    std::vector<bool> seen(adj_.size(), false);
    std::deque<std::uint32_t> queue{s};
    seen[s] = true;
    while (!queue.empty() && !seen[t]) {
      const auto u = queue.front();
      queue.pop_front();
      for (std::uint32_t i = 0; i < adj_[u].size(); ++i) {
        const Arc& a = adj_[u][i];
        if (a.cap > 0 && !seen[a.to]) {
          seen[a.to] = true;
          parent[a.to] = {u, i};
          queue.push_back(a.to);
        }
      }
    }
    if (!seen[t]) break;
    std::int32_t push = limit - total;
    for (auto v = t; v != s; v = parent[v].first) push = std::min(push, adj_[parent[v].first][parent[v].second].cap);
    for (auto v = t; v != s; v = parent[v].first) {
      Arc& a = adj_[parent[v].first][parent[v].second];
      a.cap -= push;
      adj_[a.to][a.rev].cap += push;
    }
    total += push;
  }
  return total;
}

std::int32_t FlowNetwork::min_cost_flow(std::uint32_t s, std::uint32_t t, std::int32_t units) {
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  const std::size_t n = adj_.size();
  std::vector<std::int64_t> potential(n, 0);
  std::vector<std::int64_t> dist(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> parent(n);
  std::int32_t sent = 0;

  while (sent < units) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[s] = 0;
    using Item = std::pair<std::int64_t, std::uint32_t>;  // (distance, node): ties go to the lower node
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0, s});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du != dist[u]) continue;
      for (std::uint32_t i = 0; i < adj_[u].size(); ++i) {
        const Arc& a = adj_[u][i];
        if (a.cap <= 0) continue;
        const std::int64_t nd = du + a.cost + potential[u] - potential[a.to];
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          parent[a.to] = {u, i};
          heap.push({nd, a.to});
        }
      }
    }
    if (dist[t] >= kInf) break;
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] < kInf) potential[v] += dist[v];
    }
    std::int32_t push = units - sent;
    for (auto v = t; v != s; v = parent[v].first) push = std::min(push, adj_[parent[v].first][parent[v].second].cap);
    for (auto v = t; v != s; v = parent[v].first) {
      Arc& a = adj_[parent[v].first][parent[v].second];
      a.cap -= push;
      adj_[a.to][a.rev].cap += push;
    }
    sent += push;
  }
  return sent;
}

}  // namespace detail

namespace {

using detail::FlowNetwork;

std::uint32_t in_node(Vertex v) { return 2 * v; }
std::uint32_t out_node(Vertex v) { return 2 * v + 1; }

// Unit capacity through every vertex except the endpoints, whose split arcs
// are omitted so that paths can neither revisit s nor pass through t.
FlowNetwork split_network(const Digraph& g, Vertex s, Vertex t, std::int32_t edge_cost) {
  const auto n = static_cast<Vertex>(g.size());
  FlowNetwork net(2 * g.size());
  for (Vertex v = 0; v < n; ++v) {
    if (v != s && v != t) net.add_arc(in_node(v), out_node(v), 1, 0);
  }
  for (Vertex u = 0; u < n; ++u) {
    std::vector<Vertex> succ(g.successors(u).begin(), g.successors(u).end());
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    for (Vertex v : succ) {
      if (v != u) net.add_arc(out_node(u), in_node(v), 1, edge_cost);
    }
  }
  return net;
}

void check_pair(const Digraph& g, Vertex s, Vertex t) {
  if (s >= g.size() || t >= g.size()) throw GraphError("vertex out of range");
  if (s == t) throw GraphError("disjoint paths need distinct endpoints");
}

std::size_t pair_connectivity(const Digraph& g, Vertex s, Vertex t, std::size_t limit) {
  auto net = split_network(g, s, t, 0);
  return static_cast<std::size_t>(net.max_flow(out_node(s), in_node(t), static_cast<std::int32_t>(limit)));
}

}  // namespace

std::size_t disjoint_paths(const Digraph& g, Vertex s, Vertex t) {
  check_pair(g, s, t);
  return pair_connectivity(g, s, t, g.size());
}

std::size_t vertex_connectivity(const Digraph& g) {
  const auto n = static_cast<Vertex>(g.size());
  if (n < 2) throw GraphError("connectivity needs at least two vertices");
  std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v : g.successors(u)) adjacent[u][v] = true;
  }

  // Some vertex among the first best+1 lies outside a minimum separator, so
  // only those need to be paired with every other vertex (both directions).
  std::size_t best = n - 1;
  for (Vertex i = 0; i < n && i <= best; ++i) {
    for (Vertex w = 0; w < n; ++w) {
      if (w == i) continue;
      if (!adjacent[i][w]) best = std::min(best, pair_connectivity(g, i, w, best));
      if (!adjacent[w][i]) best = std::min(best, pair_connectivity(g, w, i, best));
    }
  }
  return best;
}

DisjointPathSet min_sum_disjoint_paths(const Digraph& g, Vertex s, Vertex t, std::size_t count) {
  check_pair(g, s, t);
  auto net = split_network(g, s, t, 1);
  const auto units = static_cast<std::int32_t>(count);
  if (net.min_cost_flow(out_node(s), in_node(t), units) < units) {
    throw GraphError("fewer than " + std::to_string(count) + " disjoint paths from " + std::to_string(s) + " to " +
                     std::to_string(t));
  }

  DisjointPathSet result;
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<Vertex> path{s};
    std::uint32_t node = out_node(s);
    while (node != in_node(t)) {
      auto& arcs = net.arcs(node);
      auto it = std::find_if(arcs.begin(), arcs.end(), [&](const FlowNetwork::Arc& a) {
        return a.forward && net.flow(a) > 0;
      });
      if (it == arcs.end()) throw GraphError("flow decomposition failed");
      // consume one unit so the next walk takes a different arc
      net.arcs(it->to)[it->rev].cap -= 1;
      node = it->to;
      if (node % 2 == 0) path.push_back(node / 2);
    }
    const std::size_t len = path.size() - 1;
    result.total_length += len;
    result.longest = std::max(result.longest, len);
    result.paths.push_back(std::move(path));
  }
  return result;
}

FaultDiameterEstimate fault_diameter_estimate(const Digraph& g, std::size_t f, const EstimateOptions& opts) {
  const auto n = static_cast<Vertex>(g.size());
  if (n < 2) throw GraphError("fault diameter needs at least two vertices");
  const std::size_t units = f + 1;

  std::vector<std::pair<Vertex, Vertex>> pairs;
  if (opts.sample_pairs) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<Vertex> pick(0, n - 1);
    while (pairs.size() < *opts.sample_pairs) {
      const Vertex u = pick(rng);
      const Vertex v = pick(rng);
      if (u != v) pairs.emplace_back(u, v);
    }
  } else {
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (Vertex u = 0; u < n; ++u) {
      for (Vertex v = 0; v < n; ++v) {
        if (u != v) pairs.emplace_back(u, v);
      }
    }
  }

  FaultDiameterEstimate est;
  est.sampled = opts.sample_pairs.has_value();
  std::size_t max_sum = 0;
  for (auto [u, v] : pairs) {
    const auto paths = min_sum_disjoint_paths(g, u, v, units);
    max_sum = std::max(max_sum, paths.total_length);
    if (paths.longest > est.delta_hat) {
      est.delta_hat = paths.longest;
      est.worst_from = u;
      est.worst_to = v;
    }
    ++est.pairs_evaluated;
  }
  est.avg_lower = Rational::of(max_sum, units);
  return est;
}

std::size_t fault_diameter_bruteforce(const Digraph& g, std::size_t f) {
  const std::size_t n = g.size();
  if (n > 12) throw GraphError("exhaustive fault diameter is limited to 12 vertices");
  if (f >= n) throw GraphError("cannot remove every vertex");

  std::size_t worst = 0;
  std::vector<bool> removed(n, false);
  std::fill(removed.begin(), removed.begin() + static_cast<std::ptrdiff_t>(f), true);
  // prev_permutation over a sorted-descending mask walks every f-subset once
  do {
    auto d = diameter_without(g, removed);
    if (!d) throw GraphError("removing " + std::to_string(f) + " vertices disconnects the digraph");
    worst = std::max(worst, *d);
  } while (std::prev_permutation(removed.begin(), removed.end()));
  return worst;
}

}  // namespace allconcur
