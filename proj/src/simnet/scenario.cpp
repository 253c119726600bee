#include <algorithm>

#include "allconcur/graph_io.hpp"
#include "allconcur/simnet.hpp"
#include "json_detail.hpp"

namespace allconcur {

using Json = nlohmann::ordered_json;

namespace {

double seconds_of(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_duration(v.get<std::string>());
  throw ScenarioError("expected a duration, got " + v.dump());
}

Nanos nanos_of(const Json& v) { return to_nanos(seconds_of(v)); }

std::string duration_text(Nanos ns) { return std::to_string(ns) + "ns"; }

Digraph graph_of(const Json& g, std::string& label) {
  if (g.contains("adjacency")) {
    label = "adjacency";
    if (g["adjacency"].is_string()) return parse_adjacency(g["adjacency"].get<std::string>());
    const auto& rows = g["adjacency"];
    Digraph out(rows.size());
    for (std::size_t u = 0; u < rows.size(); ++u) {
      for (const auto& v : rows[u]) out.add_edge(static_cast<Vertex>(u), v.get<Vertex>());
    }
    return out;
  }
  if (g.contains("dot")) {
    label = "dot";
    return parse_dot(g["dot"].get<std::string>());
  }
  const auto kind = parse_graph_kind(g.at("kind").get<std::string>());
  const auto n = g.at("n").get<std::size_t>();
  const auto d = g.value("d", std::size_t{0});
  label = to_string(kind) + " n=" + std::to_string(n);
  if (kind == GraphKind::Gs) label += " d=" + std::to_string(d);
  return build_overlay(kind, n, d);
}

}  // namespace

DelayModel delay_of(const Json& v, std::uint64_t seed) {
  if (v.is_string()) return DelayModel::parse(v.get<std::string>(), seed);
  const auto kind = v.at("kind").get<std::string>();
  DelayModel m;
  if (kind == "const") {
    m = DelayModel::constant(v.at("a").get<double>(), seed);
  } else if (kind == "uniform") {
    m = DelayModel::uniform(v.at("a").get<double>(), v.at("b").get<double>(), seed);
  } else if (kind == "exp") {
    m = DelayModel::exponential(v.at("a").get<double>(), seed);
  } else {
    throw ScenarioError("unknown delay kind '" + kind + "'");
  }
  m.validate();
  return m;
}

Json delay_json(const DelayModel& m) {
  const char* kind = m.kind == DelayModel::Kind::Constant ? "const"
                     : m.kind == DelayModel::Kind::Uniform ? "uniform"
                                                           : "exp";
  Json out{{"kind", kind}, {"a", m.a}};
  if (m.kind == DelayModel::Kind::Uniform) out["b"] = m.b;
  return out;
}

void SimScenario::validate() const {
  const std::size_t n = graph.size();
  if (n < 2) throw ScenarioError("the overlay needs at least two servers");
  if (rounds < 1) throw ScenarioError("rounds must be >= 1");
  if (horizon <= 0) throw ScenarioError("horizon must be positive");
  if (overhead < 0) throw ScenarioError("overhead must be non-negative");
  fd.validate();
  delay.validate();
  std::set<ServerId> known;
  for (ServerId i = 0; i < n; ++i) known.insert(i);
  for (const auto& j : joins) {
    if (j.server < n) throw ScenarioError("joining server " + std::to_string(j.server) + " is already a member");
    if (j.sponsor >= n) throw ScenarioError("join sponsor must be an initial member");
    if (j.round < 2 || j.round > rounds) throw ScenarioError("join round must lie in 2..rounds");
    if (!known.insert(j.server).second) throw ScenarioError("server " + std::to_string(j.server) + " joins twice");
  }
  auto check = [&](ServerId id, const char* what) {
    if (!known.count(id)) throw ScenarioError(std::string(what) + " names unknown server " + std::to_string(id));
  };
  for (const auto& s : starts) {
    if (s.server >= n) throw ScenarioError("start names unknown server " + std::to_string(s.server));
    if (s.at < 0) throw ScenarioError("start time must be non-negative");
  }
  std::set<ServerId> victims;
  for (const auto& c : crashes) {
    check(c.server, "crash");
    if (!victims.insert(c.server).second) throw ScenarioError("server " + std::to_string(c.server) + " crashes twice");
    if (c.trigger == CrashPlan::Trigger::AtTime && c.at < 0) throw ScenarioError("crash time must be non-negative");
    if (c.trigger == CrashPlan::Trigger::AfterSending) {
      if (c.server >= n) throw ScenarioError("send-triggered crashes need an initial member");
      check(c.origin, "crash trigger");
      for (ServerId t : c.to) check(t, "crash trigger");
    }
  }
  for (const auto& c : cuts) {
    if (c.from >= n || c.to >= n || !graph.has_edge(c.from, c.to)) {
      throw ScenarioError("cut " + std::to_string(c.from) + "->" + std::to_string(c.to) + " is not an overlay edge");
    }
    if (c.at < 0) throw ScenarioError("cut time must be non-negative");
  }
  for (const auto& [server, rounds_map] : payloads) check(server, "payload");
}

Payload SimScenario::payload_for(ServerId server, Round round) const {
  if (auto it = payloads.find(server); it != payloads.end()) {
    if (auto jt = it->second.find(round); jt != it->second.end()) return jt->second;
  }
  return "p" + std::to_string(server) + "r" + std::to_string(round);
}

SimScenario load_scenario(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  SimScenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.graph = graph_of(j.at("graph"), s.graph_label);
    s.graph_label = j.value("graph_label", s.graph_label);
    if (j.contains("mode")) s.mode = parse_fd_mode(j["mode"].get<std::string>());
    if (j.contains("fd")) {
      const auto& f = j["fd"];
      if (f.contains("kind")) s.fd.kind = parse_fd_kind(f["kind"].get<std::string>());
      if (f.contains("hb_period")) s.fd.hb_period = seconds_of(f["hb_period"]);
      if (f.contains("timeout")) s.fd.timeout = seconds_of(f["timeout"]);
      if (f.contains("escalation_factor")) s.fd.escalation_factor = f["escalation_factor"].get<double>();
      if (f.contains("detection_latency")) s.fd.detection_latency = seconds_of(f["detection_latency"]);
    }
    s.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("delay")) s.delay = delay_of(j["delay"], s.seed);
    s.delay.seed = s.seed;
    if (j.contains("overhead")) s.overhead = seconds_of(j["overhead"]);
    s.rounds = j.value("rounds", Round{1});
    if (j.contains("horizon")) s.horizon = nanos_of(j["horizon"]);
    if (j.contains("policy")) {
      const auto& p = j["policy"];
      const auto kind = p.value("kind", std::string("prune"));
      if (kind == "prune") {
        s.policy.kind = MembershipPolicy::Kind::Prune;
      } else if (kind == "rebuild") {
        s.policy.kind = MembershipPolicy::Kind::Rebuild;
      } else {
        throw ScenarioError("unknown membership policy '" + kind + "'");
      }
      if (p.contains("graph")) s.policy.graph = parse_graph_kind(p["graph"].get<std::string>());
      s.policy.degree = p.value("degree", s.policy.degree);
    }
    for (const auto& st : j.value("starts", Json::array())) {
      s.starts.push_back(StartPlan{st.at("server").get<ServerId>(), st.contains("at") ? nanos_of(st["at"]) : 0});
    }
    if (j.contains("payloads")) {
      for (const auto& [server, per_round] : j["payloads"].items()) {
        for (const auto& [round, payload] : per_round.items()) {
          s.payloads[static_cast<ServerId>(std::stoul(server))][static_cast<Round>(std::stoul(round))] =
              payload.get<std::string>();
        }
      }
    }
    for (const auto& c : j.value("crashes", Json::array())) {
      CrashPlan plan;
      plan.server = c.at("server").get<ServerId>();
      if (c.contains("after_sending")) {
        const auto& a = c["after_sending"];
        plan.trigger = CrashPlan::Trigger::AfterSending;
        plan.round = a.value("round", Round{1});
        plan.origin = a.value("origin", plan.server);
        plan.to = a.value("to", std::vector<ServerId>{});
      } else {
        plan.at = nanos_of(c.at("at"));
      }
      s.crashes.push_back(std::move(plan));
    }
    for (const auto& c : j.value("cuts", Json::array())) {
      s.cuts.push_back(EdgeCut{c.at("from").get<ServerId>(), c.at("to").get<ServerId>(),
                               c.contains("at") ? nanos_of(c["at"]) : 0});
    }
    for (const auto& jp : j.value("joins", Json::array())) {
      s.joins.push_back(
          JoinPlan{jp.at("server").get<ServerId>(), jp.value("round", Round{2}), jp.at("sponsor").get<ServerId>()});
    }
    s.record_events = j.value("record_events", true);
  } catch (const Json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  } catch (const GraphError& e) {
    throw ScenarioError(std::string("bad overlay: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  } catch (const ProtocolError& e) {
    throw ScenarioError(e.what());
  }
  s.validate();
  return s;
}

std::string dump_scenario(const SimScenario& s) {
  Json j;
  j["name"] = s.name;
  j["graph"] = Json{{"adjacency", to_adjacency(s.graph)}};
  j["graph_label"] = s.graph_label;
  j["mode"] = to_string(s.mode);
  Json fd{{"kind", to_string(s.fd.kind)},
          {"hb_period", s.fd.hb_period},
          {"timeout", s.fd.timeout},
          {"escalation_factor", s.fd.escalation_factor}};
  if (s.fd.detection_latency) fd["detection_latency"] = *s.fd.detection_latency;
  j["fd"] = fd;
  j["delay"] = delay_json(s.delay);
  j["overhead"] = s.overhead;
  j["rounds"] = s.rounds;
  j["horizon"] = duration_text(s.horizon);
  j["seed"] = s.seed;
  j["policy"] = Json{{"kind", s.policy.kind == MembershipPolicy::Kind::Prune ? "prune" : "rebuild"},
                     {"graph", to_string(s.policy.graph)},
                     {"degree", s.policy.degree}};
  Json starts = Json::array();
  for (const auto& st : s.starts) starts.push_back(Json{{"server", st.server}, {"at", duration_text(st.at)}});
  j["starts"] = starts;
  Json payloads = Json::object();
  for (const auto& [server, per_round] : s.payloads) {
    for (const auto& [round, payload] : per_round) payloads[std::to_string(server)][std::to_string(round)] = payload;
  }
  j["payloads"] = payloads;
  Json crashes = Json::array();
  for (const auto& c : s.crashes) {
    if (c.trigger == CrashPlan::Trigger::AtTime) {
      crashes.push_back(Json{{"server", c.server}, {"at", duration_text(c.at)}});
    } else {
      crashes.push_back(
          Json{{"server", c.server}, {"after_sending", Json{{"round", c.round}, {"origin", c.origin}, {"to", c.to}}}});
    }
  }
  j["crashes"] = crashes;
  Json cuts = Json::array();
  for (const auto& c : s.cuts) cuts.push_back(Json{{"from", c.from}, {"to", c.to}, {"at", duration_text(c.at)}});
  j["cuts"] = cuts;
  Json joins = Json::array();
  for (const auto& jp : s.joins) joins.push_back(Json{{"server", jp.server}, {"round", jp.round}, {"sponsor", jp.sponsor}});
  j["joins"] = joins;
  j["record_events"] = s.record_events;
  return j.dump(2) + "\n";
}

}  // namespace allconcur
