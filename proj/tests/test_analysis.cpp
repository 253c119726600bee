#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "allconcur/analysis.hpp"
#include "allconcur/units.hpp"
#include "oracles.hpp"

using namespace allconcur;

TEST(Rational, LowestTerms) {
  EXPECT_EQ(Rational::of(16, 6), Rational::of(8, 3));
  EXPECT_EQ(Rational::of(16, 6).to_string(), "8/3");
  EXPECT_EQ(Rational::of(16, 6).ceil(), 3u);
  EXPECT_LT(Rational::of(1, 3), Rational::of(1, 2));
  EXPECT_TRUE(Rational::of(7, 2) <= 4u);
}

TEST(FaultDiameter, BinomialTwelve) {
  const auto est = fault_diameter_estimate(build_binomial(12), 5);
  EXPECT_EQ(est.delta_hat, 4u);
  EXPECT_EQ(est.avg_lower, Rational::of(8, 3));
  EXPECT_GE(est.avg_lower.ceil(), 3u);
  EXPECT_FALSE(est.sampled);
}

TEST(FaultDiameter, K4SingleFault) { EXPECT_EQ(fault_diameter_estimate(build_complete(4), 1).delta_hat, 2u); }

TEST(FaultDiameter, ZeroFaultsIsDiameter) {
  for (const auto& g : {build_gs(11, 3), build_binomial(17), build_complete(5), build_gs(30, 4)}) {
    EXPECT_EQ(fault_diameter_estimate(g, 0).delta_hat, diameter(g));
  }
}

TEST(FaultDiameter, RejectsFaultsAtConnectivity) {
  EXPECT_THROW(fault_diameter_estimate(build_gs(8, 3), 3), GraphError);
}

TEST(FaultDiameter, SampledEstimateIsFlagged) {
  EstimateOptions opts;
  opts.sample_pairs = 20;
  const auto est = fault_diameter_estimate(build_gs(64, 5), 2, opts);
  EXPECT_TRUE(est.sampled);
  EXPECT_EQ(est.pairs_evaluated, 20u);
  EXPECT_LE(est.delta_hat, fault_diameter_estimate(build_gs(64, 5), 2).delta_hat);
}

TEST(FaultDiameterBruteforce, Examples) {
  EXPECT_EQ(fault_diameter_bruteforce(build_complete(4), 1), 1u);
  Digraph cycle(6);
  for (Vertex i = 0; i < 6; ++i) cycle.add_edge(i, (i + 1) % 6);
  EXPECT_EQ(fault_diameter_bruteforce(cycle, 0), 5u);
  const Digraph g = build_gs(8, 3);
  EXPECT_LE(fault_diameter_bruteforce(g, 2), fault_diameter_estimate(g, 2).delta_hat);
  EXPECT_THROW(fault_diameter_bruteforce(build_complete(13), 1), GraphError);
}

TEST(FaultDiameterBruteforce, MatchesOracle) {
  for (const auto& g : {build_gs(9, 3), build_binomial(10), build_gs(10, 4)}) {
    const std::size_t k = vertex_connectivity(g);
    for (std::size_t f = 0; f < k; ++f) EXPECT_EQ(fault_diameter_bruteforce(g, f), oracle::fault_diameter(g, f));
  }
}

TEST(FaultDiameter, SandwichHolds) {
  for (std::size_t n = 6; n <= 10; ++n) {
    const Digraph g = build_gs(n, 3);
    for (std::size_t f = 0; f < 3; ++f) {
      const auto est = fault_diameter_estimate(g, f);
      EXPECT_TRUE(est.avg_lower <= est.delta_hat);
      EXPECT_LE(fault_diameter_bruteforce(g, f), est.delta_hat);
    }
  }
}

TEST(Moore, Examples) {
  EXPECT_EQ(moore_lower_bound(512, 8), 3u);
  EXPECT_EQ(moore_lower_bound(1024, 11), 3u);
  EXPECT_EQ(moore_lower_bound(6, 3), 2u);
}

TEST(Moore, MatchesFloatingFormulaOffBoundaries) {
  for (std::size_t d = 2; d <= 12; ++d) {
    for (std::size_t n = 2; n <= 3000; n += 7) {
      const double x = std::log(static_cast<double>(n * (d - 1) + d)) / std::log(static_cast<double>(d));
      if (std::abs(x - std::round(x)) < 1e-9) continue;
      EXPECT_EQ(moore_lower_bound(n, d), static_cast<std::size_t>(std::ceil(x)) - 1) << n << "," << d;
    }
  }
}

TEST(Moore, NeverExceedsDiameter) {
  for (std::size_t d = 3; d <= 5; ++d) {
    for (std::size_t n = 2 * d; n <= 60; ++n) EXPECT_LE(moore_lower_bound(n, d), diameter(build_gs(n, d)));
  }
}

TEST(Reliability, Examples) {
  EXPECT_DOUBLE_EQ(reliability(10, 3, 0.0), 1.0);
  EXPECT_NEAR(reliability(10, 1, 0.1), std::pow(0.9, 10), 1e-15);
  const ReliabilityParams rp{2 * kYear, 24 * 3600.0};
  EXPECT_NEAR(rp.p_f(), 1 - std::exp(-1.0 / 730), 1e-15);
  EXPECT_NEAR(reliability(64, 5, rp.p_f()), oracle::binomial_tail(64, 5, rp.p_f()), 1e-12);
}

TEST(Reliability, MatchesArbitraryPrecisionTail) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 1500;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 20);
    const double p = std::uniform_real_distribution<double>(0, 0.2)(rng);
    EXPECT_NEAR(reliability(n, k, p), oracle::binomial_tail(n, k, p), 1e-12) << n << "," << k << "," << p;
  }
}

TEST(Reliability, MonotoneInConnectivity) {
  for (std::size_t k = 1; k < 15; ++k) EXPECT_LE(reliability(200, k, 0.01), reliability(200, k + 1, 0.01));
}

TEST(ChooseDegree, SixNines) {
  const ReliabilityParams rp{parse_duration("2y"), parse_duration("24h")};
  EXPECT_EQ(choose_degree(256, 1 - 1e-6, rp), 7u);
  EXPECT_EQ(choose_degree(512, 1 - 1e-6, rp), 8u);
  EXPECT_EQ(choose_degree(1024, 1 - 1e-6, rp), 11u);
  EXPECT_EQ(choose_degree(8, 0.0, rp), 3u);
}

TEST(ChooseDegree, ChosenDegreeReachesTargetAndIsMinimal) {
  const ReliabilityParams rp{parse_duration("2y"), parse_duration("24h")};
  for (std::size_t n : {6u, 16u, 40u, 100u, 300u, 700u}) {
    const std::size_t d = choose_degree(n, 1 - 1e-6, rp);
    EXPECT_GE(reliability(n, d, rp.p_f()), 1 - 1e-6);
    if (d > 3) {
      EXPECT_LT(reliability(n, d - 1, rp.p_f()), 1 - 1e-6);
    }
  }
}

TEST(Analyze, Report) {
  const auto r = analyze(build_gs(6, 3), {1, 2});
  EXPECT_EQ(r.n, 6u);
  EXPECT_EQ(r.d, 3u);
  EXPECT_EQ(r.diameter, 2u);
  EXPECT_EQ(r.moore_lower, 2u);
  EXPECT_EQ(r.connectivity, 3u);
  ASSERT_EQ(r.fault.size(), 2u);
  EXPECT_EQ(r.fault[1].f, 2u);
  EXPECT_THROW(analyze(build_gs(6, 3), {3}), GraphError);
}
