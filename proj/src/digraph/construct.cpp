#include <algorithm>
#include <string>

#include "allconcur/digraph.hpp"

namespace allconcur {

namespace {

void require_simple_regular(const Digraph& g, std::size_t d, const char* what) {
  if (!g.is_simple()) throw GraphError(std::string(what) + ": construction produced a non-simple digraph");
  auto deg = g.regular_degree();
  if (!deg || *deg != d) {
    throw GraphError(std::string(what) + ": construction produced a digraph that is not " +
                     std::to_string(d) + "-regular");
  }
}

}  // namespace

Digraph build_complete(std::size_t n) {
  if (n < 2) throw GraphError("complete digraph needs n >= 2");
  Digraph g(n);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = 0; v < n; ++v) {
      if (u != v) g.add_edge(u, v);
    }
  }
  return g;
}

Digraph build_binomial(std::size_t n) {
  if (n < 3) throw GraphError("binomial graph needs n >= 3");
  std::vector<std::size_t> offsets;
  for (std::size_t step = 1; step <= n; step <<= 1) {
    offsets.push_back(step % n);
    offsets.push_back((n - step % n) % n);
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  offsets.erase(std::remove(offsets.begin(), offsets.end(), std::size_t{0}), offsets.end());

  Digraph g(n);
  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t off : offsets) g.add_edge(u, static_cast<Vertex>((u + off) % n));
  }
  return g;
}

Digraph build_de_bruijn(std::size_t m, std::size_t d) {
  if (m < 2) throw GraphError("generalized de Bruijn digraph needs m >= 2");
  if (d < 3) throw GraphError("generalized de Bruijn digraph needs d >= 3");
  Digraph g(m);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t a = 0; a < d; ++a) {
      g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>((u * d + a) % m));
    }
  }
  return g;
}

Digraph resolve_self_loops(const Digraph& g) {
  const std::size_t m = g.size();
  if (m < 2) throw GraphError("self-loop resolution needs at least two vertices");
  const auto deg = g.regular_degree();
  if (!deg) throw GraphError("self-loop resolution expects a regular de Bruijn multigraph");
  const std::size_t d = *deg;

  std::vector<std::size_t> loops(m);
  std::size_t total_loops = 0;
  for (Vertex u = 0; u < m; ++u) {
    loops[u] = g.self_loops(u);
    total_loops += loops[u];
  }
  if (total_loops == 0) return g;

  const std::size_t lo = d / m;
  const std::size_t hi = (d + m - 1) / m;
  std::vector<Vertex> heavy;
  for (Vertex u = 0; u < m; ++u) {
    if (loops[u] != lo && loops[u] != hi) {
      throw GraphError("vertex " + std::to_string(u) + " has " + std::to_string(loops[u]) +
                       " self-loops; expected " + std::to_string(lo) + " or " + std::to_string(hi));
    }
    if (loops[u] == hi && hi != lo) heavy.push_back(u);
  }
  if (hi != lo && heavy.size() < 2) {
    throw GraphError("fewer than two vertices carry the extra self-loop; cannot form a cycle");
  }

  Digraph r(m);
  for (Vertex u = 0; u < m; ++u) {
    for (Vertex v : g.successors(u)) {
      if (v != u) r.add_edge(u, v);
    }
  }
  for (std::size_t c = 0; c < lo; ++c) {
    for (Vertex u = 0; u < m; ++u) r.add_edge(u, static_cast<Vertex>((u + 1) % m));
  }
  for (std::size_t i = 0; i < heavy.size(); ++i) {
    r.add_edge(heavy[i], heavy[(i + 1) % heavy.size()]);
  }
  return r;
}

Digraph line_digraph(const Digraph& g) {
  if (g.has_self_loops()) throw GraphError("line digraph construction rejects self-loops");
  const auto edges = g.edges();

  // first_out[v] is the index of v's first out-edge in `edges`.
  std::vector<std::size_t> first_out(g.size() + 1, 0);
  for (Vertex v = 0; v < g.size(); ++v) first_out[v + 1] = first_out[v] + g.out_degree(v);

  Digraph l(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vertex head = edges[e].second;
    for (std::size_t f = first_out[head]; f < first_out[head + 1]; ++f) {
      l.add_edge(static_cast<Vertex>(e), static_cast<Vertex>(f));
    }
  }
  l.set_labels(edges);
  return l;
}

Digraph build_gs(std::size_t n, std::size_t d) {
  if (d < 3) throw GraphError("G_S(n,d) needs d >= 3");
  if (n < 2 * d) throw GraphError("G_S(n,d) needs n >= 2d");
  const std::size_t m = n / d;
  const std::size_t t = n % d;

  const Digraph base = resolve_self_loops(build_de_bruijn(m, d));
  Digraph line = line_digraph(base);
  if (t == 0) {
    require_simple_regular(line, d, "G_S");
    return line;
  }

  // Pivot vertex of the de Bruijn stage; X are the line-digraph vertices
  // standing for its in-edges, Y those standing for its out-edges.
  const Vertex pivot = 0;
  std::vector<Vertex> x;
  std::vector<Vertex> y;
  const auto& labels = line.labels();
  for (Vertex e = 0; e < labels.size(); ++e) {
    if (labels[e].second == pivot) x.push_back(e);
    if (labels[e].first == pivot) y.push_back(e);
  }
  if (x.size() != d || y.size() != d) throw GraphError("G_S: pivot vertex is not d-regular");

  const std::size_t base_n = line.size();
  Digraph g(n);
  for (Vertex u = 0; u < base_n; ++u) {
    for (Vertex v : line.successors(u)) g.add_edge(u, v);
  }

  const std::size_t span = d - t + 1;  // |X_i| = |Y_i|
  auto w = [&](std::size_t i) { return static_cast<Vertex>(base_n + i); };
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      if (i != j) g.add_edge(w(i), w(j));
    }
    for (std::size_t p = 0; p < span; ++p) {
      g.add_edge(x[i + p], w(i));
      g.add_edge(w(i), y[i + p]);
    }
    for (std::size_t p = 0; p < span; ++p) {
      const std::size_t q = (i + p) % span;
      if (!g.remove_edge(x[i + p], y[i + q])) {
        throw GraphError("G_S: edge selected for removal is missing");
      }
    }
  }

  require_simple_regular(g, d, "G_S");
  return g;
}

}  // namespace allconcur
