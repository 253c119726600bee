#include <sstream>

#include "allconcur/graph_io.hpp"
#include "allconcur/simnet.hpp"
#include "json_detail.hpp"

namespace allconcur {

using Json = nlohmann::ordered_json;

namespace {

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n"; }

Json batch_json(const std::vector<DeliveredEntry>& batch) {
  Json out = Json::array();
  for (const auto& e : batch) out.push_back(Json{{"origin", e.origin}, {"payload", e.payload}});
  return out;
}

}  // namespace

std::string Trace::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    Json j{{"t", r.t}, {"server", r.server}, {"kind", r.kind}};
    if (!r.msg.empty()) j["msg"] = r.msg;
    if (r.hop) j["hop"] = r.hop;
    if (r.peer) j["peer"] = *r.peer;
    out += dump_line(j);
  }
  Json summary;
  summary["scenario"] = scenario;
  summary["graph_label"] = graph_label;
  summary["mode"] = to_string(mode);
  summary["delay"] = delay_json(delay);
  summary["overhead"] = overhead;
  summary["rounds"] = rounds;
  summary["seed"] = seed;
  Json ep = Json::array();
  for (const auto& [round, info] : epochs) {
    ep.push_back(Json{{"round", round}, {"members", info.members}, {"graph", to_adjacency(info.graph)}});
  }
  summary["epochs"] = ep;
  Json bc = Json::array();
  for (const auto& [key, payload] : broadcasts) {
    bc.push_back(Json{{"round", key.first}, {"origin", key.second}, {"payload", payload}});
  }
  summary["broadcasts"] = bc;
  Json cr = Json::array();
  for (const auto& [id, t] : crashed) cr.push_back(Json{{"server", id}, {"t", t}});
  summary["crashed"] = cr;
  Json cuts = Json::array();
  for (const auto& [from, to] : cut_edges) cuts.push_back(Json{{"from", from}, {"to", to}});
  summary["cuts"] = cuts;
  Json st = Json::array();
  for (const auto& [round, per_server] : stats) {
    for (const auto& [id, s] : per_server) {
      st.push_back(Json{{"round", round},
                        {"server", id},
                        {"bcast_recv", s.bcast_recv},
                        {"foreign_bcast_recv", s.foreign_bcast_recv},
                        {"fail_recv", s.fail_recv},
                        {"delivered", s.delivered},
                        {"deliveries", s.deliveries},
                        {"depth_hops", s.depth_hops},
                        {"deliver_time", s.deliver_time},
                        {"batch", batch_json(s.batch)},
                        {"tagged", s.tagged}});
    }
  }
  summary["stats"] = st;
  summary["false_suspicions"] = false_suspicions;
  summary["end_time"] = end_time;
  summary["horizon_reached"] = horizon_reached;
  summary["events"] = events;
  out += dump_line(Json{{"summary", summary}});
  return out;
}

Trace Trace::from_jsonl(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  bool have_summary = false;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      if (!j.contains("summary")) {
        TraceRecord r;
        r.t = j.at("t").get<Nanos>();
        r.server = j.at("server").get<ServerId>();
        r.kind = j.at("kind").get<std::string>();
        r.msg = j.value("msg", std::string{});
        r.hop = j.value("hop", std::uint32_t{0});
        if (j.contains("peer")) r.peer = j["peer"].get<ServerId>();
        t.records.push_back(std::move(r));
        continue;
      }
      const Json& s = j["summary"];
      have_summary = true;
      t.scenario = s.value("scenario", std::string{});
      t.graph_label = s.value("graph_label", std::string{});
      t.mode = parse_fd_mode(s.at("mode").get<std::string>());
      t.seed = s.value("seed", std::uint64_t{0});
      t.delay = delay_of(s.at("delay"), t.seed);
      t.overhead = s.value("overhead", 0.0);
      t.rounds = s.at("rounds").get<Round>();
      for (const auto& e : s.at("epochs")) {
        t.epochs[e.at("round").get<Round>()] =
            EpochInfo{e.at("members").get<std::vector<ServerId>>(), parse_adjacency(e.at("graph").get<std::string>())};
      }
      for (const auto& b : s.at("broadcasts")) {
        t.broadcasts[{b.at("round").get<Round>(), b.at("origin").get<ServerId>()}] = b.at("payload").get<std::string>();
      }
      for (const auto& c : s.at("crashed")) t.crashed[c.at("server").get<ServerId>()] = c.at("t").get<Nanos>();
      for (const auto& c : s.at("cuts")) t.cut_edges.emplace_back(c.at("from").get<ServerId>(), c.at("to").get<ServerId>());
      for (const auto& e : s.at("stats")) {
        RoundStats rs;
        rs.bcast_recv = e.at("bcast_recv").get<std::uint64_t>();
        rs.foreign_bcast_recv = e.at("foreign_bcast_recv").get<std::uint64_t>();
        rs.fail_recv = e.at("fail_recv").get<std::uint64_t>();
        rs.delivered = e.at("delivered").get<bool>();
        rs.deliveries = e.at("deliveries").get<std::uint32_t>();
        rs.depth_hops = e.at("depth_hops").get<std::uint32_t>();
        rs.deliver_time = e.at("deliver_time").get<Nanos>();
        for (const auto& b : e.at("batch")) {
          rs.batch.push_back(DeliveredEntry{b.at("origin").get<ServerId>(), b.at("payload").get<std::string>()});
        }
        rs.tagged = e.at("tagged").get<std::vector<ServerId>>();
        t.stats[e.at("round").get<Round>()][e.at("server").get<ServerId>()] = std::move(rs);
      }
      t.false_suspicions = s.value("false_suspicions", std::uint64_t{0});
      t.end_time = s.value("end_time", Nanos{0});
      t.horizon_reached = s.value("horizon_reached", false);
      t.events = s.value("events", std::uint64_t{0});
    } catch (const Json::exception& e) {
      throw ScenarioError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ScenarioError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_summary) throw ScenarioError("trace has no summary line");
  return t;
}

}  // namespace allconcur
