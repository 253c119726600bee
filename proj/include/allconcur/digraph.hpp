#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace allconcur {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directed multigraph over dense vertex ids 0..n-1.
///
/// Parallel edges and self-loops are representable so that the intermediate
/// stages of the G_S construction (generalized de Bruijn digraphs and their
/// self-loop-free variants) can be held in the same type. Public overlay
/// constructors check simplicity before returning.
///
/// Out-edges of a vertex keep their insertion order; the global edge index
/// used by line_digraph() enumerates vertices in ascending order and each
/// vertex's out-edges in insertion order.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t n);

  std::size_t size() const { return out_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  void add_edge(Vertex u, Vertex v);
  /// Removes one copy of (u,v). Returns false when no such edge exists.
  bool remove_edge(Vertex u, Vertex v);

  std::span<const Vertex> successors(Vertex u) const { return out_.at(u); }
  std::span<const Vertex> predecessors(Vertex v) const { return in_.at(v); }
  std::size_t out_degree(Vertex u) const { return out_.at(u).size(); }
  std::size_t in_degree(Vertex v) const { return in_.at(v).size(); }

  bool has_edge(Vertex u, Vertex v) const;
  std::size_t edge_multiplicity(Vertex u, Vertex v) const;
  std::size_t self_loops(Vertex u) const { return edge_multiplicity(u, u); }

  bool has_self_loops() const;
  bool has_parallel_edges() const;
  bool is_simple() const { return !has_self_loops() && !has_parallel_edges(); }

  /// Common in/out degree when every vertex has the same one (counted with
  /// multiplicity), nullopt otherwise.
  std::optional<std::size_t> regular_degree() const;
  /// Maximum in- or out-degree.
  std::size_t max_degree() const;

  std::vector<Edge> edges() const;
  Digraph transpose() const;

  /// Per-vertex annotation: for line digraphs, the edge of the parent
  /// digraph this vertex stands for.
  const std::vector<Edge>& labels() const { return labels_; }
  void set_labels(std::vector<Edge> labels);

  bool operator==(const Digraph& other) const;

 private:
  void check_vertex(Vertex v) const;

  std::vector<std::vector<Vertex>> out_;
  std::vector<std::vector<Vertex>> in_;
  std::vector<Edge> labels_;
  std::size_t edge_count_ = 0;
};

// Constructors. Each throws GraphError when its preconditions are violated.

/// Every ordered pair (u,v), u != v. Requires n >= 2.
Digraph build_complete(std::size_t n);

/// Vertex i linked to i +/- 2^l mod n for 0 <= l <= floor(log2 n), duplicate
/// offsets collapsed. Requires n >= 3.
Digraph build_binomial(std::size_t n);

/// Generalized de Bruijn multigraph: u -> u*d + a (mod m), a = 0..d-1.
/// Self-loops and parallel edges are kept. Requires m >= 2, d >= 3.
Digraph build_de_bruijn(std::size_t m, std::size_t d);

/// Replaces the self-loops of a generalized de Bruijn multigraph with
/// floor(d/m) cycles over all vertices plus one cycle over the vertices that
/// carry ceil(d/m) loops. Cycles run in ascending id order. The result is
/// d-regular (with multiplicity) and loop-free.
Digraph resolve_self_loops(const Digraph& g);

/// One vertex per edge of g (parallel edges give distinct vertices); an edge
/// (uv -> wz) whenever v == w. Rejects inputs with self-loops.
Digraph line_digraph(const Digraph& g);

/// Simple, d-regular, optimally connected overlay on n vertices.
/// Requires d >= 3 and n >= 2d.
Digraph build_gs(std::size_t n, std::size_t d);

/// Kinds of overlay the tools know how to build.
enum class GraphKind { Complete, Binomial, Gs };

GraphKind parse_graph_kind(const std::string& text);
std::string to_string(GraphKind kind);

/// Builds an overlay by kind. `d` is only read for GraphKind::Gs.
Digraph build_overlay(GraphKind kind, std::size_t n, std::size_t d = 0);

}  // namespace allconcur
