#include "allconcur/digraph.hpp"

#include <algorithm>
#include <string>

namespace allconcur {

Digraph::Digraph(std::size_t n) : out_(n), in_(n) {}

void Digraph::check_vertex(Vertex v) const {
  if (v >= out_.size()) {
    throw GraphError("vertex " + std::to_string(v) + " out of range for digraph of size " +
                     std::to_string(out_.size()));
  }
}

void Digraph::add_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  out_[u].push_back(v);
  in_[v].push_back(u);
  ++edge_count_;
}

bool Digraph::remove_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  auto& succ = out_[u];
  auto it = std::find(succ.begin(), succ.end(), v);
  if (it == succ.end()) return false;
  succ.erase(it);
  auto& pred = in_[v];
  pred.erase(std::find(pred.begin(), pred.end(), u));
  --edge_count_;
  return true;
}

bool Digraph::has_edge(Vertex u, Vertex v) const {
  check_vertex(u);
  check_vertex(v);
  const auto& succ = out_[u];
  return std::find(succ.begin(), succ.end(), v) != succ.end();
}

std::size_t Digraph::edge_multiplicity(Vertex u, Vertex v) const {
  check_vertex(u);
  check_vertex(v);
  const auto& succ = out_[u];
  return static_cast<std::size_t>(std::count(succ.begin(), succ.end(), v));
}

bool Digraph::has_self_loops() const {
  for (Vertex u = 0; u < out_.size(); ++u) {
    if (std::find(out_[u].begin(), out_[u].end(), u) != out_[u].end()) return true;
  }
  return false;
}

bool Digraph::has_parallel_edges() const {
  std::vector<Vertex> scratch;
  for (const auto& succ : out_) {
    scratch.assign(succ.begin(), succ.end());
    std::sort(scratch.begin(), scratch.end());
    if (std::adjacent_find(scratch.begin(), scratch.end()) != scratch.end()) return true;
  }
  return false;
}

std::optional<std::size_t> Digraph::regular_degree() const {
  if (out_.empty()) return std::nullopt;
  const std::size_t d = out_[0].size();
  for (std::size_t v = 0; v < out_.size(); ++v) {
    if (out_[v].size() != d || in_[v].size() != d) return std::nullopt;
  }
  return d;
}

std::size_t Digraph::max_degree() const {
  std::size_t d = 0;
  for (std::size_t v = 0; v < out_.size(); ++v) {
    d = std::max({d, out_[v].size(), in_[v].size()});
  }
  return d;
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> result;
  result.reserve(edge_count_);
  for (Vertex u = 0; u < out_.size(); ++u) {
    for (Vertex v : out_[u]) result.emplace_back(u, v);
  }
  return result;
}

Digraph Digraph::transpose() const {
  Digraph t(size());
  for (Vertex u = 0; u < out_.size(); ++u) {
    for (Vertex v : out_[u]) t.add_edge(v, u);
  }
  return t;
}

void Digraph::set_labels(std::vector<Edge> labels) {
  if (!labels.empty() && labels.size() != size()) {
    throw GraphError("label count does not match vertex count");
  }
  labels_ = std::move(labels);
}

bool Digraph::operator==(const Digraph& other) const {
  if (size() != other.size() || edge_count_ != other.edge_count_) return false;
  for (std::size_t u = 0; u < out_.size(); ++u) {
    auto a = out_[u];
    auto b = other.out_[u];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }
  return true;
}

GraphKind parse_graph_kind(const std::string& text) {
  if (text == "complete") return GraphKind::Complete;
  if (text == "binomial") return GraphKind::Binomial;
  if (text == "gs") return GraphKind::Gs;
  throw GraphError("unknown graph kind '" + text + "' (expected complete, binomial or gs)");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Complete: return "complete";
    case GraphKind::Binomial: return "binomial";
    case GraphKind::Gs: return "gs";
  }
  return "unknown";
}

Digraph build_overlay(GraphKind kind, std::size_t n, std::size_t d) {
  switch (kind) {
    case GraphKind::Complete: return build_complete(n);
    case GraphKind::Binomial: return build_binomial(n);
    case GraphKind::Gs: return build_gs(n, d);
  }
  throw GraphError("unknown graph kind");
}

}  // namespace allconcur
