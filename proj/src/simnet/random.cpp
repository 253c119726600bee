#include <algorithm>
#include <numeric>
#include <random>

#include "allconcur/simnet.hpp"

namespace allconcur {

SimScenario random_scenario(const Digraph& g, std::size_t f, std::uint64_t seed, const RandomScenarioOptions& opts) {
  const std::size_t n = g.size();
  if (f >= n) throw ScenarioError("cannot crash " + std::to_string(f) + " of " + std::to_string(n) + " servers");
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };

  SimScenario s;
  s.name = "random-" + std::to_string(seed);
  s.graph = g;
  s.graph_label = "random";
  s.seed = seed;
  s.record_events = opts.record_events;
  s.rounds = static_cast<Round>(uniform(1, std::max<Round>(1, opts.max_rounds)));
  switch (opts.delay_kind) {
    case DelayModel::Kind::Constant: s.delay = DelayModel::constant(opts.delay, seed); break;
    case DelayModel::Kind::Uniform: s.delay = DelayModel::uniform(opts.delay / 2, opts.delay * 3 / 2, seed); break;
    case DelayModel::Kind::Exponential: s.delay = DelayModel::exponential(opts.delay, seed); break;
  }
  s.fd.detection_latency = opts.delay * 3;
  s.policy.kind = MembershipPolicy::Kind::Prune;

  const Nanos unit = to_nanos(opts.delay);
  // roughly the span of a few rounds
  const Nanos span = unit * static_cast<Nanos>(4 * s.rounds * (n < 16 ? 4 : 8));

  std::vector<ServerId> ids(n);
  std::iota(ids.begin(), ids.end(), ServerId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  // A random nonempty subset starts early; the rest get a late local
  // trigger unless a received message starts them first.
  const std::size_t starters = uniform(1, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto latest = static_cast<std::uint64_t>(i < starters ? unit * 3 : span);
    s.starts.push_back(StartPlan{ids[i], static_cast<Nanos>(uniform(0, latest))});
  }

  std::shuffle(ids.begin(), ids.end(), rng);
  for (std::size_t i = 0; i < f; ++i) {
    CrashPlan c;
    c.server = ids[i];
    if (uniform(0, 1) == 0) {
      c.trigger = CrashPlan::Trigger::AtTime;
      c.at = static_cast<Nanos>(uniform(0, static_cast<std::uint64_t>(span)));
    } else {
      c.trigger = CrashPlan::Trigger::AfterSending;
      c.round = static_cast<Round>(uniform(1, s.rounds));
      c.origin = uniform(0, 2) == 0 ? static_cast<ServerId>(uniform(0, n - 1)) : c.server;
      for (Vertex v : g.successors(c.server)) {
        if (uniform(0, 1)) c.to.push_back(v);
      }
    }
    s.crashes.push_back(std::move(c));
  }
  return s;
}

}  // namespace allconcur
