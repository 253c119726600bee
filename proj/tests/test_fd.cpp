#include <gtest/gtest.h>

#include <cmath>

#include "allconcur/fd.hpp"
#include "allconcur/simnet.hpp"

using namespace allconcur;

namespace {

constexpr Nanos kMs = 1'000'000;

CrashPlan crash_at(ServerId server, Nanos at) {
  CrashPlan c;
  c.server = server;
  c.at = at;
  return c;
}

FdConfig heartbeat(double hb, double to) {
  FdConfig cfg;
  cfg.kind = FdKind::Heartbeat;
  cfg.hb_period = hb;
  cfg.timeout = to;
  return cfg;
}

}  // namespace

TEST(FdConfig, Validation) {
  EXPECT_NO_THROW(heartbeat(0.01, 0.1).validate());
  EXPECT_THROW(heartbeat(0, 0.1).validate(), FdError);
  EXPECT_THROW(heartbeat(0.2, 0.1).validate(), FdError);
  FdConfig bad = heartbeat(0.01, 0.1);
  bad.escalation_factor = 0.5;
  EXPECT_THROW(bad.validate(), FdError);
  EXPECT_EQ(parse_fd_kind("heartbeat"), FdKind::Heartbeat);
  EXPECT_THROW(parse_fd_kind("psychic"), std::exception);
}

TEST(Monitor, TimeoutBoundary) {
  const FdConfig cfg = heartbeat(0.01, 0.1);
  EXPECT_TRUE(monitor_step(150 * kMs, {{3, 100 * kMs}}, cfg).empty());
  EXPECT_EQ(monitor_step(150 * kMs, {{3, 0}}, cfg), (std::vector<ServerId>{3}));
  EXPECT_TRUE(monitor_step(100 * kMs, {{3, 0}}, cfg).empty());
  EXPECT_EQ(monitor_step(100 * kMs + 1, {{3, 0}, {4, 50 * kMs}}, cfg), (std::vector<ServerId>{3}));
}

TEST(DelayModel, ParseAndTail) {
  const auto c = DelayModel::parse("const:1ms");
  EXPECT_EQ(c.kind, DelayModel::Kind::Constant);
  EXPECT_DOUBLE_EQ(c.tail(0.0005), 1.0);
  EXPECT_DOUBLE_EQ(c.tail(0.001), 0.0);
  const auto u = DelayModel::parse("uniform:1ms:3ms");
  EXPECT_NEAR(u.tail(0.002), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(u.upper_bound(), 0.003);
  const auto e = DelayModel::parse("exp:10ms");
  EXPECT_NEAR(e.tail(0.01), std::exp(-1.0), 1e-12);
  EXPECT_TRUE(std::isinf(e.upper_bound()));
  EXPECT_THROW(DelayModel::parse("gauss:1ms"), std::exception);
  EXPECT_THROW(DelayModel::parse("uniform:3ms:1ms"), std::exception);
}

TEST(DelaySampler, DeterministicStreams) {
  const auto m = DelayModel::exponential(0.01, 9);
  DelaySampler a(m), b(m), other(m, 1);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const Nanos x = a.sample();
    EXPECT_EQ(x, b.sample());
    differs |= x != other.sample();
    EXPECT_GE(x, 0);
  }
  EXPECT_TRUE(differs);
}

TEST(DelaySampler, UniformStaysInRange) {
  DelaySampler s(DelayModel::uniform(0.001, 0.003, 4));
  for (int i = 0; i < 1000; ++i) {
    const double x = s.sample_seconds();
    EXPECT_GE(x, 0.001);
    EXPECT_LE(x, 0.003);
  }
}

TEST(Accuracy, BoundedDelayIsCertain) {
  const DelayModel m = DelayModel::uniform(0.0, 0.05);
  EXPECT_DOUBLE_EQ(accuracy_probability(heartbeat(0.01, 0.1), 32, 4, [&](double t) { return m.tail(t); }), 1.0);
}

TEST(Accuracy, TimeoutBelowPeriodIsVacuous) {
  FdConfig cfg = heartbeat(0.02, 0.01);
  EXPECT_DOUBLE_EQ(accuracy_probability(cfg, 8, 3, [](double) { return 0.5; }), 0.0);
}

TEST(Accuracy, InRange) {
  const DelayModel m = DelayModel::exponential(0.01);
  const double p = accuracy_probability(heartbeat(0.01, 0.1), 32, 4, [&](double t) { return m.tail(t); });
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

TEST(Accuracy, Monotonicity) {
  const DelayModel m = DelayModel::exponential(0.01);
  auto tail = [&](double t) { return m.tail(t); };
  double prev = 0;
  for (double to = 0.01; to <= 0.2; to += 0.01) {
    const double p = accuracy_probability(heartbeat(0.01, to), 16, 4, tail);
    EXPECT_GE(p, prev - 1e-15) << to;
    prev = p;
  }
  for (std::size_t n = 4; n < 64; n += 4) {
    EXPECT_GE(accuracy_probability(heartbeat(0.01, 0.04), n, 3, tail),
              accuracy_probability(heartbeat(0.01, 0.04), n + 4, 3, tail));
    EXPECT_GE(accuracy_probability(heartbeat(0.01, 0.04), n, 3, tail),
              accuracy_probability(heartbeat(0.01, 0.04), n, 4, tail));
  }
}

TEST(Accuracy, ClosedFormBelowMonteCarlo) {
  const DelayModel m = DelayModel::exponential(0.01);
  for (double to : {0.03, 0.05}) {
    const FdConfig cfg = heartbeat(0.01, to);
    const double bound = accuracy_probability(cfg, 8, 3, [&](double t) { return m.tail(t); });
    const auto est = accuracy_monte_carlo(cfg, 8, 3, m, 5000, 17);
    EXPECT_LE(bound, est.frequency() + 3 * est.sigma() + 1e-12) << to;
  }
}

namespace {

SimScenario heartbeat_scenario(double delay) {
  SimScenario s;
  s.graph = build_gs(8, 3);
  s.fd = heartbeat(0.01, 0.1);
  s.delay = DelayModel::constant(delay);
  s.rounds = 2;
  for (ServerId i = 0; i < 8; ++i) s.starts.push_back(StartPlan{i, 2000 * kMs});
  return s;
}

}  // namespace

TEST(HeartbeatSim, CrashSuspectedWithinBound) {
  SimScenario s = heartbeat_scenario(0.001);
  // crash long before anyone broadcasts so the detector alone decides
  s.crashes.push_back(crash_at(3, 500 * kMs));
  const Trace t = run(s);
  std::set<ServerId> detectors;
  for (const auto& r : t.records) {
    if (r.kind != "suspect" || r.peer != 3u) continue;
    detectors.insert(r.server);
    EXPECT_GE(r.t, 500 * kMs + 100 * kMs - 10 * kMs);
    EXPECT_LE(r.t, 500 * kMs + 1 * kMs + 100 * kMs + 10 * kMs);
  }
  const auto succ = s.graph.successors(3);
  EXPECT_EQ(detectors, std::set<ServerId>(succ.begin(), succ.end()));
  EXPECT_EQ(t.false_suspicions, 0u);
  EXPECT_TRUE(verify(t).all_pass()) << verify(t).summary();
}

TEST(HeartbeatSim, SmallConstantDelayNoFalseSuspicion) {
  for (double delay : {0.001, 0.02, 0.089}) {
    const Trace t = run(heartbeat_scenario(delay));
    EXPECT_EQ(t.false_suspicions, 0u) << delay;
  }
}

TEST(HeartbeatSim, CompletenessUnderRandomDelays) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimScenario s = heartbeat_scenario(0.001);
    s.mode = FdMode::Eventual;
    s.delay = DelayModel::exponential(0.002, seed);
    s.crashes.push_back(crash_at(static_cast<ServerId>(seed), 300 * kMs));
    const Trace t = run(s);
    std::set<ServerId> detectors;
    for (const auto& r : t.records) {
      if (r.kind == "suspect" && r.peer == static_cast<ServerId>(seed)) detectors.insert(r.server);
    }
    const auto succ = s.graph.successors(static_cast<Vertex>(seed));
    EXPECT_EQ(detectors, std::set<ServerId>(succ.begin(), succ.end())) << seed;
  }
}

TEST(OracleSim, NeverFalselySuspects) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Trace t = run(random_scenario(build_gs(8, 3), seed % 3, seed));
    EXPECT_EQ(t.false_suspicions, 0u);
  }
}

TEST(HeartbeatSim, EscalationRecoversFromFalseSuspicion) {
  SimScenario s = heartbeat_scenario(0.001);
  s.mode = FdMode::Eventual;
  s.fd = heartbeat(0.01, 0.012);
  s.delay = DelayModel::exponential(0.004, 3);
  const Trace t = run(s);
  EXPECT_GT(t.false_suspicions, 0u);
  std::size_t unsuspects = 0;
  for (const auto& r : t.records) unsuspects += r.kind == "unsuspect";
  EXPECT_GT(unsuspects, 0u);
  EXPECT_TRUE(verify(t).get("agreement").pass);
}
