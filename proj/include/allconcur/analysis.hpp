#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "allconcur/digraph.hpp"

namespace allconcur {

/// Non-negative fraction kept in lowest terms.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational of(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::uint64_t ceil() const { return (num + den - 1) / den; }
  std::string to_string() const;

  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

bool operator<=(const Rational& a, std::uint64_t b);

/// Longest shortest path over all ordered pairs. Throws GraphError when some
/// vertex cannot reach another.
std::size_t diameter(const Digraph& g);

/// Diameter of g with the vertices flagged in `removed` deleted; nullopt when
/// the remainder is not strongly connected. An empty remainder or a single
/// vertex has diameter 0.
std::optional<std::size_t> diameter_without(const Digraph& g, const std::vector<bool>& removed);

/// Maximum number of internally vertex-disjoint s->t paths. A direct edge
/// counts as one path.
std::size_t disjoint_paths(const Digraph& g, Vertex s, Vertex t);

/// Vertex connectivity k(g); n-1 when every ordered pair is adjacent.
std::size_t vertex_connectivity(const Digraph& g);

struct DisjointPathSet {
  /// Each path lists its vertices from s to t inclusive.
  std::vector<std::vector<Vertex>> paths;
  std::size_t total_length = 0;
  std::size_t longest = 0;
};

/// `count` internally vertex-disjoint s->t paths of minimum total length,
/// found by successive shortest paths. Equal-cost choices go to the lower
/// vertex id. Throws GraphError when fewer than `count` disjoint paths exist.
DisjointPathSet min_sum_disjoint_paths(const Digraph& g, Vertex s, Vertex t, std::size_t count);

struct EstimateOptions {
  /// When set, only this many ordered pairs drawn uniformly at random are
  /// evaluated and the result is an estimate rather than a bound.
  std::optional<std::size_t> sample_pairs;
  std::uint64_t seed = 1;
};

struct FaultDiameterEstimate {
  /// max over pairs of (sum of path lengths)/(f+1)
  Rational avg_lower;
  /// max over pairs of the longest of the f+1 paths
  std::size_t delta_hat = 0;
  Vertex worst_from = 0;
  Vertex worst_to = 0;
  std::size_t pairs_evaluated = 0;
  bool sampled = false;
};

/// Heuristic bounds on the fault diameter from min-sum f+1 disjoint paths.
/// Throws GraphError when some pair has fewer than f+1 disjoint paths.
FaultDiameterEstimate fault_diameter_estimate(const Digraph& g, std::size_t f, const EstimateOptions& opts = {});

/// Exact fault diameter: max diameter over all removals of exactly f
/// vertices. Limited to n <= 12; throws GraphError when a removal
/// disconnects g.
std::size_t fault_diameter_bruteforce(const Digraph& g, std::size_t f);

/// ceil(log_d(n(d-1)+d)) - 1, in integer arithmetic.
std::size_t moore_lower_bound(std::size_t n, std::size_t d);

/// P[fewer than k of n servers fail] with independent failure probability p_f.
double reliability(std::size_t n, std::size_t k, double p_f);

struct ReliabilityParams {
  double mttf = 0;   // seconds
  double delta = 0;  // seconds

  /// 1 - exp(-delta/mttf)
  double p_f() const;
};

/// Smallest d >= 3 with 2d <= n whose G_S overlay (k = d) reaches `target`.
std::size_t choose_degree(std::size_t n, double target, const ReliabilityParams& rel);

struct FaultBound {
  std::size_t f = 0;
  Rational avg_lower;
  std::size_t delta_hat = 0;
};

struct GraphReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t diameter = 0;
  std::size_t connectivity = 0;
  std::size_t moore_lower = 0;
  std::vector<FaultBound> fault;  // one entry per evaluated f
};

/// Fills every field; fault bounds computed for each f in `fs` (all must be
/// below the connectivity).
GraphReport analyze(const Digraph& g, const std::vector<std::size_t>& fs = {}, const EstimateOptions& opts = {});

}  // namespace allconcur
