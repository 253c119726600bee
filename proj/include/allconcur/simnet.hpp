#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "allconcur/digraph.hpp"
#include "allconcur/fd.hpp"
#include "allconcur/protocol.hpp"
#include "allconcur/units.hpp"

namespace allconcur {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CrashPlan {
  enum class Trigger { AtTime, AfterSending };
  ServerId server = 0;
  Trigger trigger = Trigger::AtTime;
  Nanos at = 0;
  // AfterSending: the server crashes at its first send of Bcast(round,
  // origin), after that message has reached only `to`.
  Round round = 1;
  ServerId origin = 0;
  std::vector<ServerId> to;
};

/// Cuts the connection carrying edge from->to (both directions) at `at`,
/// and makes `to` falsely suspect `from`.
struct EdgeCut {
  ServerId from = 0;
  ServerId to = 0;
  Nanos at = 0;
};

struct StartPlan {
  ServerId server = 0;
  Nanos at = 0;
};

/// `server` asks to join; `sponsor` carries the request as its payload of
/// round `round - 1`.
struct JoinPlan {
  ServerId server = 0;
  Round round = 2;
  ServerId sponsor = 0;
};

struct SimScenario {
  std::string name;
  Digraph graph;
  /// How `graph` was produced, for reports ("gs n=8 d=3", "adjacency", ...).
  std::string graph_label;
  FdMode mode = FdMode::Perfect;
  FdConfig fd;
  DelayModel delay = DelayModel::constant(0.001);
  /// Charged per received and per sent message when positive.
  double overhead = 0;
  Round rounds = 1;
  Nanos horizon = 60'000'000'000;
  std::uint64_t seed = 1;
  MembershipPolicy policy;
  /// Default: every server starts at time 0.
  std::vector<StartPlan> starts;
  /// payloads[server][round]; missing entries default to "p<server>r<round>".
  std::map<ServerId, std::map<Round, Payload>> payloads;
  std::vector<CrashPlan> crashes;
  std::vector<EdgeCut> cuts;
  std::vector<JoinPlan> joins;
  /// Keep per-event records in the trace (counters are always kept).
  bool record_events = true;

  /// Throws ScenarioError when the plan references unknown servers, etc.
  void validate() const;
  Payload payload_for(ServerId server, Round round) const;
};

SimScenario load_scenario(const std::string& json_text);
std::string dump_scenario(const SimScenario& s);

struct TraceRecord {
  Nanos t = 0;
  ServerId server = 0;
  std::string kind;  // start recv send suspect crash deliver tag round drop
  std::string msg;
  std::uint32_t hop = 0;
  std::optional<ServerId> peer;
};

struct RoundStats {
  std::uint64_t bcast_recv = 0;
  std::uint64_t foreign_bcast_recv = 0;
  std::uint64_t fail_recv = 0;
  std::uint32_t depth_hops = 0;
  bool delivered = false;
  Nanos deliver_time = 0;
  std::vector<DeliveredEntry> batch;
  std::vector<ServerId> tagged;
  std::uint32_t deliveries = 0;  // Deliver effects emitted; must stay <= 1
};

/// Overlay in force during one round.
struct EpochInfo {
  std::vector<ServerId> members;
  Digraph graph;
};

struct Trace {
  std::string scenario;
  std::string graph_label;
  FdMode mode = FdMode::Perfect;
  DelayModel delay;
  double overhead = 0;
  Round rounds = 1;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::map<Round, std::map<ServerId, RoundStats>> stats;
  std::map<Round, EpochInfo> epochs;
  /// (round, origin) -> payload of every A-broadcast that happened
  std::map<std::pair<Round, ServerId>, Payload> broadcasts;
  std::map<ServerId, Nanos> crashed;
  std::vector<std::pair<ServerId, ServerId>> cut_edges;
  std::uint64_t false_suspicions = 0;
  Nanos end_time = 0;
  bool horizon_reached = false;
  std::uint64_t events = 0;

  std::string to_jsonl() const;
  static Trace from_jsonl(const std::string& text);
};

Trace run(const SimScenario& scenario);

struct Verdict {
  std::string name;
  bool applicable = true;
  bool pass = true;
  std::string detail;
};

struct Verdicts {
  std::vector<Verdict> items;
  bool all_pass() const;
  const Verdict& get(const std::string& name) const;
  std::string summary() const;
};

/// Checks integrity, agreement, total order, validity, the depth bound, the
/// per-server message bounds and (under partitions) single-component delivery.
Verdicts verify(const Trace& trace);

struct RandomScenarioOptions {
  Round max_rounds = 3;
  double delay = 0.001;  // constant link delay, seconds
  DelayModel::Kind delay_kind = DelayModel::Kind::Constant;
  bool record_events = false;
};

/// Seeded random fault plan with exactly `f` crash victims (triggers may not
/// fire if the victim never sends the chosen message).
SimScenario random_scenario(const Digraph& g, std::size_t f, std::uint64_t seed,
                            const RandomScenarioOptions& opts = {});

// ---- exhaustive exploration ----

struct ExploreOptions {
  std::size_t n = 3;
  /// Overlay; defaults to the complete digraph on n vertices.
  std::optional<Digraph> graph;
  std::size_t f = 0;
  /// Stop after this many distinct states (result flagged partial).
  std::size_t state_cap = 5'000'000;
};

struct ExploreResult {
  std::uint64_t states = 0;
  std::uint64_t executions = 0;  // terminal states reached
  std::uint64_t agreement_violations = 0;
  std::uint64_t order_violations = 0;
  std::uint64_t integrity_violations = 0;
  std::uint64_t liveness_violations = 0;
  bool partial = false;
  std::string first_violation;

  bool all_pass() const {
    return agreement_violations == 0 && order_violations == 0 && integrity_violations == 0 && liveness_violations == 0 &&
           !partial;
  }
};

/// Every interleaving of link deliveries and, for f = 1, a crash of each
/// server after every prefix of every send sequence it emits. One round.
ExploreResult explore(const ExploreOptions& opts);

}  // namespace allconcur
