#pragma once

// Reference computations written independently of the library code, with
// plain adjacency lists and brute force. Used to cross-check the optimized
// implementations on small inputs.

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cstddef>
#include <limits>
#include <queue>
#include <set>
#include <vector>

#include "allconcur/digraph.hpp"

namespace oracle {

using Adj = std::vector<std::vector<std::size_t>>;

inline Adj adjacency(const allconcur::Digraph& g) {
  Adj adj(g.size());
  for (const auto& [u, v] : g.edges()) adj[u].push_back(v);
  return adj;
}

constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

inline std::vector<std::size_t> bfs(const Adj& adj, std::size_t src, const std::vector<bool>& gone) {
  std::vector<std::size_t> dist(adj.size(), kUnreachable);
  std::queue<std::size_t> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (!gone[v] && dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

/// Diameter ignoring `gone` vertices; kUnreachable when disconnected.
inline std::size_t diameter(const Adj& adj, const std::vector<bool>& gone) {
  std::size_t worst = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (gone[s]) continue;
    const auto dist = bfs(adj, s, gone);
    for (std::size_t t = 0; t < adj.size(); ++t) {
      if (gone[t]) continue;
      if (dist[t] == kUnreachable) return kUnreachable;
      worst = std::max(worst, dist[t]);
    }
  }
  return worst;
}

inline std::size_t diameter(const allconcur::Digraph& g) {
  return diameter(adjacency(g), std::vector<bool>(g.size(), false));
}

/// Smallest vertex set whose removal leaves the rest not strongly connected
/// (or a single vertex). Enumerates all subsets; meant for n <= 12.
inline std::size_t vertex_connectivity(const allconcur::Digraph& g) {
  const Adj adj = adjacency(g);
  const std::size_t n = g.size();
  std::size_t best = n - 1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto removed = static_cast<std::size_t>(__builtin_popcount(mask));
    if (removed >= best || n - removed < 2) continue;
    std::vector<bool> gone(n);
    for (std::size_t i = 0; i < n; ++i) gone[i] = (mask >> i) & 1u;
    if (diameter(adj, gone) == kUnreachable) best = removed;
  }
  return best;
}

/// Exact fault diameter: worst diameter over removals of exactly f vertices.
inline std::size_t fault_diameter(const allconcur::Digraph& g, std::size_t f) {
  const Adj adj = adjacency(g);
  const std::size_t n = g.size();
  std::size_t worst = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != f) continue;
    std::vector<bool> gone(n);
    for (std::size_t i = 0; i < n; ++i) gone[i] = (mask >> i) & 1u;
    worst = std::max(worst, diameter(adj, gone));
  }
  return worst;
}

using Big = boost::multiprecision::cpp_dec_float_100;

/// P[fewer than k of n fail] summed term by term in 100-digit decimal.
inline double binomial_tail(std::size_t n, std::size_t k, double p_f) {
  const Big p(p_f);
  const Big q = Big(1) - p;
  Big total = 0;
  Big choose = 1;
  for (std::size_t i = 0; i < k && i <= n; ++i) {
    if (i > 0) choose = choose * Big(n - i + 1) / Big(i);
    total += choose * pow(p, static_cast<int>(i)) * pow(q, static_cast<int>(n - i));
  }
  return static_cast<double>(total);
}

}  // namespace oracle
