#pragma once

#include <string>
#include <string_view>

#include "allconcur/digraph.hpp"

namespace allconcur {

/// `digraph <name> {` followed by one `u -> v;` line per edge. Every vertex
/// is also declared on its own so isolated vertices survive a round trip.
std::string to_dot(const Digraph& g, std::string_view name = "G");

/// Accepts the subset of DOT written by to_dot: integer vertex names, `->`
/// edges (chains allowed), bare vertex statements, `//` comments and
/// attribute lists, which are ignored.
Digraph parse_dot(std::string_view text);

/// First line "n d" (d = max degree), then "<id>: <succ> <succ> ..." per
/// vertex in id order.
std::string to_adjacency(const Digraph& g);
Digraph parse_adjacency(std::string_view text);

}  // namespace allconcur
