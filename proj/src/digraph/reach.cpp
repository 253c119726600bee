#include <cstdint>
#include <vector>

#include "allconcur/analysis.hpp"
#include "allconcur/simd/bitset_ops.hpp"

namespace allconcur {

namespace {

// Row v holds the set of vertices reachable from v within h hops. One sweep
// extends every row by one hop: R'[v] = R[v] | OR_{u in v+} R[u].
class ReachMatrix {
 public:
  ReachMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), rows_(n * words_, 0) {}

  std::uint64_t* row(std::size_t v) { return rows_.data() + v * words_; }
  const std::uint64_t* row(std::size_t v) const { return rows_.data() + v * words_; }
  std::size_t words() const { return words_; }
  void set(std::size_t v, std::size_t bit) { row(v)[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  void swap(ReachMatrix& other) { rows_.swap(other.rows_); }
  void copy_from(const ReachMatrix& other) { rows_ = other.rows_; }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> rows_;
};

std::optional<std::size_t> sweep(const Digraph& g, const std::vector<bool>* removed) {
  const std::size_t n = g.size();
  const auto& ops = simd::ops();
  auto is_alive = [&](std::size_t v) { return removed == nullptr || !(*removed)[v]; };

  std::size_t alive = 0;
  for (std::size_t v = 0; v < n; ++v) alive += is_alive(v) ? 1 : 0;
  if (alive <= 1) return 0;

  ReachMatrix cur(n), next(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (is_alive(v)) cur.set(v, v);
  }

  for (std::size_t hops = 0;; ++hops) {
    bool full = true;
    for (std::size_t v = 0; v < n && full; ++v) {
      if (is_alive(v) && ops.popcount(cur.row(v), cur.words()) != alive) full = false;
    }
    if (full) return hops;

    next.copy_from(cur);
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (!is_alive(v)) continue;
      for (Vertex u : g.successors(static_cast<Vertex>(v))) {
        if (is_alive(u)) ops.or_into(next.row(v), cur.row(u), cur.words());
      }
      if (!changed && !ops.equal(next.row(v), cur.row(v), cur.words())) changed = true;
    }
    if (!changed) return std::nullopt;
    cur.swap(next);
  }
}

}  // namespace

std::size_t diameter(const Digraph& g) {
  auto result = sweep(g, nullptr);
  if (!result) throw GraphError("digraph is not strongly connected (infinite diameter)");
  return *result;
}

std::optional<std::size_t> diameter_without(const Digraph& g, const std::vector<bool>& removed) {
  if (removed.size() != g.size()) throw GraphError("removal mask size does not match vertex count");
  return sweep(g, &removed);
}

}  // namespace allconcur
