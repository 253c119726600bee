#pragma once

#include <cstdint>
#include <vector>

namespace allconcur::detail {

/// Residual network with paired forward/backward arcs.
class FlowNetwork {
 public:
  struct Arc {
    std::uint32_t to;
    std::uint32_t rev;  // index of the paired arc in adjacency of `to`
    std::int32_t cap;
    std::int32_t cost;
    bool forward;
  };

  explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

  std::size_t size() const { return adj_.size(); }
  void add_arc(std::uint32_t from, std::uint32_t to, std::int32_t cap, std::int32_t cost = 0);

  /// Augments along BFS-shortest paths until `limit` units flow or none
  /// remain. Returns the flow value.
  std::int32_t max_flow(std::uint32_t s, std::uint32_t t, std::int32_t limit);

  /// Successive shortest paths with Dijkstra over reduced costs. Stops after
  /// `units` units; returns the number actually sent.
  std::int32_t min_cost_flow(std::uint32_t s, std::uint32_t t, std::int32_t units);

  std::vector<Arc>& arcs(std::uint32_t node) { return adj_[node]; }
  const std::vector<Arc>& arcs(std::uint32_t node) const { return adj_[node]; }

  /// Flow on a forward arc (capacity consumed so far).
  std::int32_t flow(const Arc& a) const { return adj_[a.to][a.rev].cap; }

 private:
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace allconcur::detail
