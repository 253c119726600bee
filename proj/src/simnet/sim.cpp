#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>

#include "allconcur/simnet.hpp"

namespace allconcur {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using MsgKey = std::tuple<std::size_t, Round, ServerId, ServerId>;

MsgKey key_of(const Message& msg) {
  return std::visit(Overloaded{
                        [](const Bcast& m) { return MsgKey{0, m.round, m.origin, 0}; },
                        [](const Fail& m) { return MsgKey{1, m.round, m.failed, m.detector}; },
                        [](const Fwd& m) { return MsgKey{2, m.round, m.origin, 0}; },
                        [](const Bwd& m) { return MsgKey{3, m.round, m.origin, 0}; },
                        [](const Heartbeat& m) { return MsgKey{4, 0, m.from, 0}; },
                    },
                    msg);
}

std::string describe_batch(const std::vector<DeliveredEntry>& batch) {
  std::string out = "[";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i) out += ",";
    out += "p" + std::to_string(batch[i].origin);
  }
  return out + "]";
}

enum class EventKind { Arrive, Process, Start, Suspect, Crash, HbSend, HbArrive, MonitorTick };

bool is_protocol(EventKind k) {
  return k == EventKind::Arrive || k == EventKind::Process || k == EventKind::Start || k == EventKind::Suspect;
}

struct Event {
  Nanos t = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Process;
  ServerId server = 0;
  ServerId peer = 0;
  Message msg;
  std::uint32_t hop = 0;
  Nanos depart = 0;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const { return std::tie(a.t, a.server, a.seq) > std::tie(b.t, b.server, b.seq); }
};

struct InboxItem {
  enum class Kind { Msg, Suspect, Start } kind = Kind::Msg;
  ServerId peer = 0;
  Message msg;
  std::uint32_t hop = 0;
};

struct Node {
  std::optional<Server> server;
  bool spawned = false;
  bool crashed = false;
  Nanos crash_time = 0;
  std::deque<InboxItem> inbox;
  bool process_scheduled = false;
  Nanos busy_until = 0;
  std::map<MsgKey, std::uint32_t> first_hop;
  std::optional<CrashPlan> send_trigger;
  // heartbeat detector state
  std::map<ServerId, Nanos> last_heard;
  std::map<ServerId, Nanos> timeout;
  std::set<ServerId> fd_suspected;
};

class Simulator {
 public:
  explicit Simulator(const SimScenario& sc)
      : sc_(sc), proto_delay_(sc.delay, 0), hb_delay_(sc.delay, 1), overhead_(sc.overhead > 0 ? to_nanos(sc.overhead) : 0),
        latency_(to_nanos(sc.fd.oracle_latency())), hb_period_(to_nanos(sc.fd.hb_period)),
        base_timeout_(to_nanos(sc.fd.timeout)) {}

  Trace run() {
    setup();
    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.t > sc_.horizon) {
        trace_.horizon_reached = true;
        break;
      }
      queue_.pop();
      now_ = ev.t;
      ++trace_.events;
      if (is_protocol(ev.kind)) --outstanding_;
      dispatch(ev);
      if (done()) break;
    }
    trace_.end_time = now_;
    for (const auto& c : sc_.cuts) trace_.cut_edges.emplace_back(c.from, c.to);
    return std::move(trace_);
  }

 private:
  void setup() {
    trace_.scenario = sc_.name;
    trace_.graph_label = sc_.graph_label;
    trace_.mode = sc_.mode;
    trace_.delay = sc_.delay;
    trace_.overhead = sc_.overhead;
    trace_.rounds = sc_.rounds;
    trace_.seed = sc_.seed;

    auto overlay = Overlay::dense(sc_.graph);
    trace_.epochs[1] = EpochInfo{overlay->members(), overlay->graph()};
    for (ServerId id : overlay->members()) {
      Node& node = nodes_[id];
      node.server.emplace(config_for(id, overlay, 1));
      node.spawned = true;
      for (Round r = 1; r <= sc_.rounds; ++r) node.server->stage(r, sc_.payload_for(id, r));
    }
    for (const auto& j : sc_.joins) {
      nodes_[j.server];
      nodes_.at(j.sponsor).server->stage(j.round - 1, join_request(j.server));
    }
    if (sc_.starts.empty()) {
      for (ServerId id : overlay->members()) push_start(id, 0);
    } else {
      for (const auto& s : sc_.starts) push_start(s.server, s.at);
    }
    for (const auto& c : sc_.crashes) {
      if (c.trigger == CrashPlan::Trigger::AtTime) {
        Event ev;
        ev.t = c.at;
        ev.kind = EventKind::Crash;
        ev.server = c.server;
        push(std::move(ev));
      } else {
        nodes_.at(c.server).send_trigger = c;
      }
    }
    for (const auto& c : sc_.cuts) {
      for (auto link : {std::pair{c.from, c.to}, std::pair{c.to, c.from}}) {
        auto it = cuts_.find(link);
        if (it == cuts_.end() || it->second > c.at) cuts_[link] = c.at;
      }
      if (sc_.fd.kind == FdKind::Oracle) {
        Event ev;
        ev.t = c.at + latency_;
        ev.kind = EventKind::Suspect;
        ev.server = c.to;
        ev.peer = c.from;
        suspicion_scheduled_.insert({c.to, c.from});
        ++outstanding_;
        push(std::move(ev));
      }
    }
    if (sc_.fd.kind == FdKind::Heartbeat) {
      for (ServerId id : overlay->members()) start_heartbeats(id);
    }
  }

  ServerConfig config_for(ServerId id, std::shared_ptr<const Overlay> overlay, Round first) const {
    ServerConfig cfg;
    cfg.me = id;
    cfg.overlay = std::move(overlay);
    cfg.mode = sc_.mode;
    cfg.policy = sc_.policy;
    cfg.max_rounds = sc_.rounds;
    cfg.eager_start = true;
    cfg.first_round = first;
    return cfg;
  }

  void push(Event ev) {
    ev.seq = seq_++;
    queue_.push(std::move(ev));
  }

  void push_start(ServerId id, Nanos at) {
    Event ev;
    ev.t = at;
    ev.kind = EventKind::Start;
    ev.server = id;
    ++outstanding_;
    push(std::move(ev));
  }

  void record(ServerId server, std::string kind, std::string msg = {}, std::uint32_t hop = 0,
              std::optional<ServerId> peer = std::nullopt) {
    if (!sc_.record_events) return;
    trace_.records.push_back(TraceRecord{now_, server, std::move(kind), std::move(msg), hop, peer});
  }

  bool done() const {
    if (outstanding_ != 0) return false;
    for (const auto& [id, node] : nodes_) {
      if (node.spawned && !node.crashed && !node.server->finished()) return false;
    }
    return true;
  }

  bool link_cut(ServerId from, ServerId to, Nanos at) const {
    auto it = cuts_.find({from, to});
    return it != cuts_.end() && it->second <= at;
  }

  void dispatch(const Event& ev) {
    Node& node = nodes_.at(ev.server);
    switch (ev.kind) {
      case EventKind::Arrive: on_arrive(node, ev); break;
      case EventKind::Process: on_process(node, ev.server); break;
      case EventKind::Start:
        if (node.crashed) break;
        node.inbox.push_back(InboxItem{InboxItem::Kind::Start, 0, {}, 0});
        schedule_process(node, ev.server);
        break;
      case EventKind::Suspect:
        if (node.crashed) break;
        node.inbox.push_back(InboxItem{InboxItem::Kind::Suspect, ev.peer, {}, 0});
        schedule_process(node, ev.server);
        break;
      case EventKind::Crash: crash(ev.server, now_); break;
      case EventKind::HbSend: on_hb_send(node, ev.server); break;
      case EventKind::HbArrive: on_hb_arrive(node, ev); break;
      case EventKind::MonitorTick: on_monitor(node, ev.server); break;
    }
  }

  void on_arrive(Node& node, const Event& ev) {
    const Node& sender = nodes_.at(ev.peer);
    if (sender.crashed && sender.crash_time < ev.depart) return;
    if (node.crashed) return;
    const Round r = round_of(ev.msg);
    if (const auto* b = std::get_if<Bcast>(&ev.msg)) {
      auto& st = trace_.stats[r][ev.server];
      ++st.bcast_recv;
      if (b->origin != ev.server) ++st.foreign_bcast_recv;
    } else if (std::holds_alternative<Fail>(ev.msg)) {
      ++trace_.stats[r][ev.server].fail_recv;
    }
    node.inbox.push_back(InboxItem{InboxItem::Kind::Msg, ev.peer, ev.msg, ev.hop});
    schedule_process(node, ev.server);
  }

  void schedule_process(Node& node, ServerId id) {
    if (node.process_scheduled || !node.spawned || node.crashed) return;
    node.process_scheduled = true;
    Event ev;
    ev.t = std::max(now_, node.busy_until);
    ev.kind = EventKind::Process;
    ev.server = id;
    ++outstanding_;
    push(std::move(ev));
  }

  void on_process(Node& node, ServerId id) {
    node.process_scheduled = false;
    if (node.crashed || node.inbox.empty()) return;
    InboxItem item = std::move(node.inbox.front());
    node.inbox.pop_front();
    Server& server = *node.server;
    Effects effects;
    std::uint32_t trigger_hop = 0;
    Nanos cpu = now_;
    switch (item.kind) {
      case InboxItem::Kind::Msg: {
        const MsgKey key = key_of(item.msg);
        trigger_hop = item.hop;
        record(id, "recv", describe(item.msg), item.hop, item.peer);
        node.first_hop.try_emplace(key, item.hop);
        effects = server.receive(item.peer, item.msg);
        cpu += overhead_;
        break;
      }
      case InboxItem::Kind::Suspect:
        record(id, "suspect", {}, 0, item.peer);
        effects = server.suspect(item.peer);
        break;
      case InboxItem::Kind::Start:
        if (server.finished() || server.broadcast_done()) break;
        record(id, "start");
        effects = server.start();
        break;
    }
    execute(node, id, effects, trigger_hop, cpu);
    if (!node.crashed && !node.inbox.empty()) schedule_process(node, id);
  }

  void execute(Node& node, ServerId id, const Effects& effects, std::uint32_t trigger_hop, Nanos cpu) {
    // A-broadcasts are recorded before any crash filtering.
    for (const auto& eff : effects) {
      if (const auto* send = std::get_if<Send>(&eff)) {
        if (const auto* b = std::get_if<Bcast>(&send->msg); b && b->origin == id) {
          trace_.broadcasts.try_emplace({b->round, id}, b->payload);
        }
      }
    }
    for (std::size_t i = 0; i < effects.size(); ++i) {
      const Effect& eff = effects[i];
      if (const auto* send = std::get_if<Send>(&eff)) {
        if (node.send_trigger && matches_trigger(*node.send_trigger, send->msg)) {
          const CrashPlan plan = *node.send_trigger;
          node.send_trigger.reset();
          const MsgKey key = key_of(send->msg);
          for (std::size_t j = i; j < effects.size(); ++j) {
            const auto* s = std::get_if<Send>(&effects[j]);
            if (!s || key_of(s->msg) != key) continue;
            if (std::find(plan.to.begin(), plan.to.end(), s->to) == plan.to.end()) continue;
            cpu += overhead_;
            transmit(node, id, *s, cpu);
          }
          node.busy_until = cpu;
          crash(id, cpu);
          return;
        }
        cpu += overhead_;
        transmit(node, id, *send, cpu);
      } else if (const auto* d = std::get_if<Deliver>(&eff)) {
        auto& st = trace_.stats[d->round][id];
        ++st.deliveries;
        if (!st.delivered) {
          st.delivered = true;
          st.deliver_time = cpu;
          st.depth_hops = trigger_hop;
          st.batch = d->batch;
        }
        record(id, "deliver", describe_batch(d->batch), trigger_hop);
      } else if (const auto* tg = std::get_if<TaggedFailed>(&eff)) {
        auto& st = trace_.stats[tg->round][id];
        st.tagged = tg->servers;
        std::string text;
        for (ServerId s : tg->servers) text += (text.empty() ? "p" : ",p") + std::to_string(s);
        record(id, "tag", text);
      } else if (const auto* er = std::get_if<EnterRound>(&eff)) {
        on_enter_round(id, *er);
      } else if (const auto* diag = std::get_if<Diagnostic>(&eff)) {
        record(id, "diagnostic", diag->text);
      }
    }
    node.busy_until = cpu;
  }

  static bool matches_trigger(const CrashPlan& plan, const Message& msg) {
    const auto* b = std::get_if<Bcast>(&msg);
    return b && b->round == plan.round && b->origin == plan.origin;
  }

  void transmit(Node& node, ServerId from, const Send& send, Nanos depart) {
    const MsgKey key = key_of(send.msg);
    auto it = node.first_hop.find(key);
    const std::uint32_t hop = it == node.first_hop.end() ? 1 : it->second + 1;
    if (link_cut(from, send.to, depart)) {
      record(from, "drop", describe(send.msg), hop, send.to);
      return;
    }
    const Nanos delay = proto_delay_.sample();
    Nanos& last = last_arrival_[{from, send.to}];
    const Nanos arrival = std::max(depart + delay, last);
    last = arrival;
    record(from, "send", describe(send.msg), hop, send.to);
    Event ev;
    ev.t = arrival;
    ev.kind = EventKind::Arrive;
    ev.server = send.to;
    ev.peer = from;
    ev.msg = send.msg;
    ev.hop = hop;
    ev.depart = depart;
    ++outstanding_;
    push(std::move(ev));
  }

  void crash(ServerId id, Nanos at) {
    Node& node = nodes_.at(id);
    if (node.crashed) return;
    node.crashed = true;
    node.crash_time = at;
    node.inbox.clear();
    trace_.crashed[id] = at;
    record(id, "crash");
    if (sc_.fd.kind != FdKind::Oracle) return;
    for (auto& [other, peer] : nodes_) {
      if (!peer.spawned || peer.crashed || peer.server->finished()) continue;
      const Overlay& ov = peer.server->overlay();
      if (ov.contains(id) && ov.is_successor(id, other)) schedule_suspicion(other, id, at + latency_);
    }
  }

  void schedule_suspicion(ServerId server, ServerId pred, Nanos at) {
    if (!suspicion_scheduled_.insert({server, pred}).second) return;
    auto it = last_arrival_.find({pred, server});
    if (it != last_arrival_.end()) at = std::max(at, it->second);
    Event ev;
    ev.t = std::max(at, now_);
    ev.kind = EventKind::Suspect;
    ev.server = server;
    ev.peer = pred;
    ++outstanding_;
    push(std::move(ev));
  }

  void on_enter_round(ServerId id, const EnterRound& er) {
    record(id, "round", std::to_string(er.round));
    if (er.overlay) trace_.epochs.try_emplace(er.round, EpochInfo{er.overlay->members(), er.overlay->graph()});
    watch_predecessors(id, *er.overlay);
    for (const auto& j : sc_.joins) {
      if (j.sponsor != id || j.round != er.round) continue;
      Node& joiner = nodes_.at(j.server);
      if (joiner.spawned || !er.overlay->contains(j.server)) continue;
      joiner.server.emplace(config_for(j.server, er.overlay, j.round));
      for (Round r = j.round; r <= sc_.rounds; ++r) joiner.server->stage(r, sc_.payload_for(j.server, r));
      joiner.spawned = true;
      record(j.server, "join", std::to_string(j.round), 0, id);
      joiner.inbox.push_front(InboxItem{InboxItem::Kind::Start, 0, {}, 0});
      joiner.busy_until = now_;
      schedule_process(joiner, j.server);
      watch_predecessors(j.server, *er.overlay);
      if (sc_.fd.kind == FdKind::Heartbeat) start_heartbeats(j.server);
    }
  }

  void watch_predecessors(ServerId id, const Overlay& ov) {
    if (sc_.fd.kind != FdKind::Oracle) return;
    for (ServerId p : ov.predecessors(id)) {
      const Node& pred = nodes_.at(p);
      if (pred.crashed) schedule_suspicion(id, p, pred.crash_time + latency_);
    }
  }

  // ---- heartbeat detector ----

  void start_heartbeats(ServerId id) {
    Event send;
    send.t = now_;
    send.kind = EventKind::HbSend;
    send.server = id;
    push(std::move(send));
    Event tick;
    tick.t = now_ + hb_period_;
    tick.kind = EventKind::MonitorTick;
    tick.server = id;
    push(std::move(tick));
  }

  void on_hb_send(Node& node, ServerId id) {
    if (node.crashed) return;
    for (ServerId s : node.server->overlay().successors(id)) {
      if (link_cut(id, s, now_)) continue;
      Event ev;
      ev.t = now_ + hb_delay_.sample();
      ev.kind = EventKind::HbArrive;
      ev.server = s;
      ev.peer = id;
      push(std::move(ev));
    }
    Event next;
    next.t = now_ + hb_period_;
    next.kind = EventKind::HbSend;
    next.server = id;
    push(std::move(next));
  }

  void on_hb_arrive(Node& node, const Event& ev) {
    if (node.crashed || !node.spawned) return;
    node.last_heard[ev.peer] = now_;
    if (node.fd_suspected.erase(ev.peer) && !nodes_.at(ev.peer).crashed) {
      auto& to = node.timeout[ev.peer];
      to = static_cast<Nanos>(static_cast<double>(to) * sc_.fd.escalation_factor);
      record(ev.server, "unsuspect", {}, 0, ev.peer);
    }
  }

  void on_monitor(Node& node, ServerId id) {
    if (node.crashed || node.server->finished()) return;
    for (ServerId p : node.server->overlay().predecessors(id)) {
      node.last_heard.try_emplace(p, now_);
      const Nanos timeout = node.timeout.try_emplace(p, base_timeout_).first->second;
      if (node.fd_suspected.count(p)) continue;
      if (monitor_step(now_, {{p, node.last_heard[p]}}, timeout).empty()) continue;
      node.fd_suspected.insert(p);
      if (!nodes_.at(p).crashed) {
        ++trace_.false_suspicions;
        record(id, "false_suspicion", {}, 0, p);
      }
      node.inbox.push_back(InboxItem{InboxItem::Kind::Suspect, p, {}, 0});
      schedule_process(node, id);
    }
    Event next;
    next.t = now_ + hb_period_;
    next.kind = EventKind::MonitorTick;
    next.server = id;
    push(std::move(next));
  }

  const SimScenario& sc_;
  DelaySampler proto_delay_;
  DelaySampler hb_delay_;
  Nanos overhead_;
  Nanos latency_;
  Nanos hb_period_;
  Nanos base_timeout_;
  std::map<ServerId, Node> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t outstanding_ = 0;
  Nanos now_ = 0;
  std::map<std::pair<ServerId, ServerId>, Nanos> last_arrival_;
  std::map<std::pair<ServerId, ServerId>, Nanos> cuts_;
  std::set<std::pair<ServerId, ServerId>> suspicion_scheduled_;
  Trace trace_;
};

}  // namespace

Trace run(const SimScenario& scenario) {
  scenario.validate();
  return Simulator(scenario).run();
}

}  // namespace allconcur
