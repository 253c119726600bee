#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "allconcur/digraph.hpp"
#include "allconcur/protocol.hpp"

namespace allconcur {

class NodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MemberAddress {
  ServerId id = 0;
  std::string host;
  std::uint16_t port = 0;
};

/// Lines "<id> <host> <port>"; blank lines and '#' comments are skipped.
/// Ids must be exactly 0..n-1, each once.
std::vector<MemberAddress> parse_membership(const std::string& text);

struct NodeOptions {
  ServerId me = 0;
  std::vector<MemberAddress> members;
  /// Overlay over the member ids; vertex i is member i.
  Digraph graph;
  FdMode mode = FdMode::Perfect;
  Round rounds = 1;
  /// Payload of round r is payload_prefix + "<id>r<r>".
  std::string payload_prefix = "p";
  /// Exit abruptly (no goodbye, sockets dropped) on entering this round.
  std::optional<Round> crash_round;
  double hb_period = 0.05;  // seconds
  double timeout = 1.0;     // seconds without any frame from a predecessor
  /// Predecessors that never connect within this many seconds are suspected.
  double connect_grace = 10.0;
  /// Keep relaying for this long after the last round.
  double linger = 1.0;
  /// Give up when the last round is not done within this many seconds.
  double deadline = 60.0;
};

/// Runs one server over TCP until its last round is done (plus linger).
/// Each delivered round is printed to `out` as one JSON line
/// {"server":..,"round":..,"batch":[{"origin":..,"payload":..}],"tagged":[..]}.
/// Returns 0 on success, 2 when the deadline passes.
int run_node(const NodeOptions& opts, std::ostream& out);

}  // namespace allconcur
