#include <algorithm>
#include <deque>

#include "allconcur/protocol.hpp"

namespace allconcur {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append(Effects& out, Effects more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

}  // namespace

Server::Server(ServerConfig config) : cfg_(std::move(config)) {
  if (!cfg_.overlay) throw ProtocolError("server needs an overlay");
  if (cfg_.overlay->size() < 2) throw ProtocolError("at least two servers are required");
  if (!cfg_.overlay->contains(cfg_.me)) throw ProtocolError("server id " + std::to_string(cfg_.me) + " out of range");
  if (cfg_.first_round < 1) throw ProtocolError("rounds start at 1");
  if (cfg_.max_rounds && *cfg_.max_rounds < cfg_.first_round) throw ProtocolError("max_rounds precedes the first round");
  overlay_ = cfg_.overlay;
  round_ = cfg_.first_round;
  reset_round();
}

void Server::reset_round() {
  cur_ = RoundState{};
  for (ServerId id : overlay_->members()) {
    auto& g = cur_.tracking[id];
    if (id != cfg_.me) g.reset(id);
  }
}

const TrackingDigraph& Server::tracking(ServerId origin) const {
  auto it = cur_.tracking.find(origin);
  if (it == cur_.tracking.end()) throw ProtocolError("no tracking digraph for server " + std::to_string(origin));
  return it->second;
}

void Server::stage(Round round, Payload payload) { staged_[round] = std::move(payload); }

Payload Server::staged_payload() const {
  auto it = staged_.find(round_);
  return it == staged_.end() ? Payload{} : it->second;
}

void Server::send_to_successors(const Message& msg, Effects& out) const {
  for (ServerId s : overlay_->successors(cfg_.me)) out.push_back(Send{s, msg});
}

void Server::send_to_predecessors(const Message& msg, Effects& out) const {
  for (ServerId p : overlay_->predecessors(cfg_.me)) {
    if (!suspected_.count(p)) out.push_back(Send{p, msg});
  }
}

Effects Server::broadcast_own(Payload payload) {
  if (cur_.broadcast_done) {
    throw ProtocolError("server " + std::to_string(cfg_.me) + " already broadcast in round " + std::to_string(round_));
  }
  Effects out;
  cur_.broadcast_done = true;
  send_to_successors(Bcast{round_, cfg_.me, payload}, out);
  cur_.known[cfg_.me] = std::move(payload);
  cur_.sent.insert(cfg_.me);
  return out;
}

Effects Server::start() {
  if (finished_ || cur_.broadcast_done) return {};
  return a_broadcast(staged_payload());
}

Effects Server::a_broadcast(Payload payload) {
  if (finished_) throw ProtocolError("server has finished its last round");
  auto out = broadcast_own(std::move(payload));
  append(out, check_termination());
  return out;
}

void Server::disseminate(Effects& out) {
  for (const auto& [origin, payload] : cur_.known) {
    if (cur_.sent.insert(origin).second) send_to_successors(Bcast{round_, origin, payload}, out);
  }
}

Effects Server::receive(ServerId from, const Message& msg) {
  if (std::holds_alternative<Heartbeat>(msg)) return {};
  const Round r = round_of(msg);
  const bool is_fail = std::holds_alternative<Fail>(msg);
  if (r < round_) {
    if (prev_ && r + 1 == round_) return relay_previous(msg);
    return {};
  }
  if (finished_) return {};
  if (!is_fail && suspected_.count(from)) return {};
  if (r > round_) {
    buffered_.emplace_back(from, msg);
    return {};
  }
  return std::visit(Overloaded{
                        [&](const Bcast& m) { return handle_bcast(m); },
                        [&](const Fail& m) { return handle_fail(m); },
                        [&](const Fwd& m) { return handle_fwd(m); },
                        [&](const Bwd& m) { return handle_bwd(m); },
                        [&](const Heartbeat&) { return Effects{}; },
                    },
                    msg);
}

Effects Server::suspect(ServerId pred) {
  if (finished_) return {};
  if (!overlay_->contains(pred) || !overlay_->is_successor(pred, cfg_.me)) {
    return {Diagnostic{"ignoring suspicion of non-predecessor " + std::to_string(pred)}};
  }
  if (!suspected_.insert(pred).second) return {};
  // Whatever pred sent ahead of this round must not reach us either;
  // otherwise the notification below would claim something false.
  std::erase_if(buffered_, [&](const auto& item) {
    return item.first == pred && !std::holds_alternative<Fail>(item.second);
  });
  return handle_fail(Fail{round_, pred, cfg_.me});
}

Effects Server::handle_bcast(const Bcast& msg) {
  if (finished_ || msg.round != round_) return {};
  if (cur_.decided || cur_.known.count(msg.origin) || !overlay_->contains(msg.origin)) return {};
  Effects out;
  if (!cur_.broadcast_done) out = broadcast_own(staged_payload());
  cur_.known[msg.origin] = msg.payload;
  disseminate(out);
  cur_.tracking[msg.origin].clear();
  append(out, check_termination());
  return out;
}

Effects Server::handle_fail(const Fail& note) {
  if (finished_ || note.round != round_) return {};
  if (!overlay_->contains(note.failed) || !overlay_->contains(note.detector)) return {};
  if (!overlay_->is_successor(note.failed, note.detector)) {
    throw ProtocolError("p" + std::to_string(note.detector) + " is not a successor of p" + std::to_string(note.failed));
  }
  const std::pair<ServerId, ServerId> key{note.failed, note.detector};
  if (cur_.fails.count(key)) return {};
  Effects out;
  send_to_successors(note, out);
  cur_.fails.insert(key);
  cur_.failed_known.insert(note.failed);
  if (!cur_.decided) update_tracking(note);
  append(out, check_termination());
  return out;
}

void Server::update_tracking(const Fail& note) {
  const ServerId failed = note.failed;
  for (auto& [origin, g] : cur_.tracking) {
    if (!g.has_vertex(failed)) continue;
    if (!g.has_successors(failed)) {
      std::deque<std::pair<ServerId, ServerId>> queue;
      for (ServerId p : overlay_->successors(failed)) {
        if (p != note.detector) queue.emplace_back(failed, p);
      }
      while (!queue.empty()) {
        const auto [parent, p] = queue.front();
        queue.pop_front();
        if (!g.has_vertex(p)) {
          g.add_vertex(p);
          if (cur_.failed_known.count(p)) {
            for (ServerId s : overlay_->successors(p)) {
              if (!cur_.fails.count({p, s})) queue.emplace_back(p, s);
            }
          }
        }
        g.add_edge(parent, p);
      }
    } else if (g.has_edge(failed, note.detector)) {
      g.remove_edge(failed, note.detector);
      g.prune_unreachable(origin);
    }
    const bool all_failed = std::all_of(g.vertices().begin(), g.vertices().end(),
                                        [&](ServerId v) { return cur_.failed_known.count(v) != 0; });
    if (all_failed) g.clear();
  }
}

Effects Server::check_termination() {
  if (finished_) return {};
  for (const auto& [origin, g] : cur_.tracking) {
    if (!g.empty()) return {};
  }
  Effects out;
  if (!cur_.broadcast_done) out = broadcast_own(staged_payload());
  if (cfg_.mode == FdMode::Perfect) {
    finish_round(out);
    return out;
  }
  if (!cur_.decided) {
    cur_.decided = true;
    cur_.fwd_from.insert(cfg_.me);
    cur_.bwd_from.insert(cfg_.me);
    send_to_successors(Fwd{round_, cfg_.me}, out);
    send_to_predecessors(Bwd{round_, cfg_.me}, out);
  }
  try_deliver(out);
  return out;
}

void Server::try_deliver(Effects& out) {
  if (!cur_.decided) return;
  std::size_t both = 0;
  for (ServerId id : cur_.fwd_from) both += cur_.bwd_from.count(id);
  if (2 * both > overlay_->size()) finish_round(out);
}

Effects Server::handle_fwd(const Fwd& probe) {
  if (cfg_.mode == FdMode::Perfect) return {Diagnostic{"ignoring " + describe(probe) + " under a perfect detector"}};
  if (finished_ || probe.round != round_ || !overlay_->contains(probe.origin)) return {};
  if (!cur_.fwd_from.insert(probe.origin).second) return {};
  Effects out;
  send_to_successors(probe, out);
  try_deliver(out);
  return out;
}

Effects Server::handle_bwd(const Bwd& probe) {
  if (cfg_.mode == FdMode::Perfect) return {Diagnostic{"ignoring " + describe(probe) + " under a perfect detector"}};
  if (finished_ || probe.round != round_ || !overlay_->contains(probe.origin)) return {};
  if (!cur_.bwd_from.insert(probe.origin).second) return {};
  Effects out;
  send_to_predecessors(probe, out);
  try_deliver(out);
  return out;
}

Effects Server::relay_previous(const Message& msg) {
  PreviousRound& prev = *prev_;
  if (!prev.overlay->contains(cfg_.me)) return {};
  Effects out;
  auto to_successors = [&](const Message& m) {
    for (ServerId s : prev.overlay->successors(cfg_.me)) out.push_back(Send{s, m});
  };
  std::visit(Overloaded{
                 [&](const Fail& m) {
                   if (!prev.overlay->contains(m.failed) || !prev.overlay->contains(m.detector)) return;
                   if (prev.fails_seen.insert({m.failed, m.detector}).second) to_successors(m);
                 },
                 [&](const Fwd& m) {
                   if (cfg_.mode == FdMode::Eventual && prev.fwd_seen.insert(m.origin).second) to_successors(m);
                 },
                 [&](const Bwd& m) {
                   if (cfg_.mode != FdMode::Eventual || !prev.bwd_seen.insert(m.origin).second) return;
                   for (ServerId p : prev.overlay->predecessors(cfg_.me)) {
                     if (!suspected_.count(p)) out.push_back(Send{p, m});
                   }
                 },
                 [&](const auto&) {},
             },
             msg);
  return out;
}

void Server::finish_round(Effects& out) {
  const Round done = round_;
  Deliver deliver{done, {}};
  std::vector<ServerId> joined;
  for (const auto& [origin, payload] : cur_.known) {
    deliver.batch.push_back(DeliveredEntry{origin, payload});
    if (auto id = parse_join(payload); id && !overlay_->contains(*id)) joined.push_back(*id);
  }
  out.push_back(std::move(deliver));

  std::vector<ServerId> tagged_now;
  for (ServerId id : overlay_->members()) {
    if (!cur_.known.count(id)) tagged_now.push_back(id);
  }
  if (!tagged_now.empty()) {
    out.push_back(TaggedFailed{done, tagged_now});
    tagged_.insert(tagged_now.begin(), tagged_now.end());
  }
  for (ServerId id : joined) tagged_.erase(id);

  const auto pending = cur_.fails;
  prev_ = PreviousRound{overlay_, cur_.fails, cur_.fwd_from, cur_.bwd_from};
  ++round_;

  if (cfg_.max_rounds && round_ > *cfg_.max_rounds) {
    finished_ = true;
    cur_ = RoundState{};
    buffered_.clear();
    return;
  }

  if (!tagged_now.empty() || !joined.empty()) {
    if (overlay_->size() + joined.size() < tagged_now.size() + 2) {
      out.push_back(Diagnostic{"fewer than two servers remain; stopping after round " + std::to_string(done)});
      finished_ = true;
      cur_ = RoundState{};
      buffered_.clear();
      return;
    }
    overlay_ = next_overlay(*overlay_, tagged_now, joined, cfg_.policy);
  }
  std::erase_if(suspected_, [&](ServerId id) { return !overlay_->contains(id); });
  reset_round();
  out.push_back(EnterRound{round_, overlay_->members(), overlay_});

  const Round entered = round_;
  // resend failures about servers that stay in the membership
  for (const auto& [failed, detector] : pending) {
    if (round_ != entered) break;
    if (!overlay_->contains(failed) || !overlay_->contains(detector)) continue;
    if (!overlay_->is_successor(failed, detector)) continue;
    append(out, handle_fail(Fail{round_, failed, detector}));
  }

  std::vector<std::pair<ServerId, Message>> replay;
  std::vector<std::pair<ServerId, Message>> later;
  for (auto& item : buffered_) {
    (round_of(item.second) == entered ? replay : later).push_back(std::move(item));
  }
  buffered_ = std::move(later);
  for (const auto& [from, msg] : replay) append(out, receive(from, msg));

  if (cfg_.eager_start && round_ == entered) append(out, start());
}

bool Server::is_noop(ServerId from, const Message& msg) const {
  if (std::holds_alternative<Heartbeat>(msg)) return true;
  const Round r = round_of(msg);
  if (r < round_) {
    if (!prev_ || r + 1 != round_ || !prev_->overlay->contains(cfg_.me)) return true;
    return std::visit(Overloaded{
                          [&](const Fail& m) {
                            return !prev_->overlay->contains(m.failed) || !prev_->overlay->contains(m.detector) ||
                                   prev_->fails_seen.count({m.failed, m.detector}) != 0;
                          },
                          [&](const Fwd& m) { return cfg_.mode != FdMode::Eventual || prev_->fwd_seen.count(m.origin) != 0; },
                          [&](const Bwd& m) { return cfg_.mode != FdMode::Eventual || prev_->bwd_seen.count(m.origin) != 0; },
                          [&](const auto&) { return true; },
                      },
                      msg);
  }
  if (finished_) return true;
  const bool is_fail = std::holds_alternative<Fail>(msg);
  if (!is_fail && suspected_.count(from)) return true;
  if (r > round_) return false;
  return std::visit(Overloaded{
                        [&](const Bcast& m) {
                          return cur_.decided || cur_.known.count(m.origin) != 0 || !overlay_->contains(m.origin);
                        },
                        [&](const Fail& m) {
                          if (!overlay_->contains(m.failed) || !overlay_->contains(m.detector)) return true;
                          return cur_.fails.count({m.failed, m.detector}) != 0;
                        },
                        [&](const Fwd& m) {
                          return cfg_.mode == FdMode::Eventual &&
                                 (!overlay_->contains(m.origin) || cur_.fwd_from.count(m.origin) != 0);
                        },
                        [&](const Bwd& m) {
                          return cfg_.mode == FdMode::Eventual &&
                                 (!overlay_->contains(m.origin) || cur_.bwd_from.count(m.origin) != 0);
                        },
                        [&](const Heartbeat&) { return true; },
                    },
                    msg);
}

namespace {

void put(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }

void put_set(std::string& out, const std::set<ServerId>& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  for (ServerId v : s) put(out, v);
}

void put_pairs(std::string& out, const std::set<std::pair<ServerId, ServerId>>& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  for (auto [a, b] : s) {
    put(out, a);
    put(out, b);
  }
}

void put_message(std::string& out, const Message& msg) {
  put(out, static_cast<std::uint32_t>(msg.index()));
  std::visit(Overloaded{
                 [&](const Bcast& m) {
                   put(out, m.round);
                   put(out, m.origin);
                   put(out, static_cast<std::uint32_t>(m.payload.size()));
                   out += m.payload;
                 },
                 [&](const Fail& m) {
                   put(out, m.round);
                   put(out, m.failed);
                   put(out, m.detector);
                 },
                 [&](const Fwd& m) {
                   put(out, m.round);
                   put(out, m.origin);
                 },
                 [&](const Bwd& m) {
                   put(out, m.round);
                   put(out, m.origin);
                 },
                 [&](const Heartbeat& m) { put(out, m.from); },
             },
             msg);
}

}  // namespace

void Server::fingerprint(std::string& out) const {
  put(out, round_);
  out.push_back(static_cast<char>((finished_ ? 1 : 0) | (cur_.broadcast_done ? 2 : 0) | (cur_.decided ? 4 : 0)));
  put(out, static_cast<std::uint32_t>(overlay_->size()));
  for (ServerId id : overlay_->members()) put(out, id);
  put(out, static_cast<std::uint32_t>(cur_.known.size()));
  for (const auto& [origin, payload] : cur_.known) {
    put(out, origin);
    put(out, static_cast<std::uint32_t>(payload.size()));
    out += payload;
  }
  put_pairs(out, cur_.fails);
  for (const auto& [origin, g] : cur_.tracking) {
    put(out, origin);
    put_set(out, g.vertices());
    put_pairs(out, g.edges());
  }
  put_set(out, cur_.sent);
  put_set(out, cur_.fwd_from);
  put_set(out, cur_.bwd_from);
  put_set(out, suspected_);
  put_set(out, tagged_);
  if (prev_) {
    out.push_back('P');
    put_pairs(out, prev_->fails_seen);
    put_set(out, prev_->fwd_seen);
    put_set(out, prev_->bwd_seen);
  }
  put(out, static_cast<std::uint32_t>(buffered_.size()));
  for (const auto& [from, msg] : buffered_) {
    put(out, from);
    put_message(out, msg);
  }
}

}  // namespace allconcur
