#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "proc.hpp"

namespace {

const std::string kCli = ALLCONCUR_CLI;
const std::string kScenarios = ALLCONCUR_SCENARIOS;

testproc::Output cli(const std::string& args) { return testproc::capture(kCli + " " + args + " 2>&1"); }

std::string temp_path(const std::string& tag) {
  return "/tmp/allconcur_cli_" + tag + "_" + std::to_string(::getpid());
}

}  // namespace

TEST(Cli, GraphAnalyzeGs) {
  const auto r = cli("graph analyze --kind gs --n 6 --d 3");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("D=2 DL=2"), std::string::npos) << r.out;
}

TEST(Cli, GraphAnalyzeBinomialFaults) {
  const auto r = cli("graph analyze --kind binomial --n 12 --f 1,5");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("f=1 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("f=5 avg_lower=8/3 delta_hat=4"), std::string::npos) << r.out;
}

TEST(Cli, GraphGenCompleteTwo) {
  const auto r = cli("graph gen --kind complete --n 2");
  EXPECT_EQ(r.status, 0);
  std::size_t arrows = 0;
  for (std::size_t at = r.out.find("->"); at != std::string::npos; at = r.out.find("->", at + 2)) ++arrows;
  EXPECT_EQ(arrows, 2u) << r.out;
  EXPECT_EQ(r.out.rfind("digraph", 0), 0u);
}

TEST(Cli, GraphFileInput) {
  const std::string path = temp_path("graph");
  ASSERT_EQ(cli("graph gen --kind gs --n 11 --d 3 --format adjacency -o " + path).status, 0);
  const auto r = cli("graph analyze --graph-file " + path);
  std::remove(path.c_str());
  EXPECT_NE(r.out.find("n=11 d=3 D=3 DL=2 k=3"), std::string::npos) << r.out;
}

TEST(Cli, SimRunBundledScript) {
  const auto r = testproc::capture(kCli + " sim run --scenario " + kScenarios + "/running_example.json --trace '' 2>&1");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS agreement"), std::string::npos);
}

TEST(Cli, SimRunDeterministic) {
  const std::string args = " sim run --kind gs --n 8 --d 3 --crash 1@1ms --rounds 2 --delay exp:1ms --seed 7 -q --trace -";
  const auto a = testproc::capture(kCli + args);
  const auto b = testproc::capture(kCli + args);
  EXPECT_EQ(a.status, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
  const auto c = testproc::capture(kCli + " sim run --kind gs --n 8 --d 3 --crash 1@1ms --rounds 2 --delay exp:1ms --seed 8 -q --trace -");
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, SeedFromEnvironment) {
  const std::string args = " sim run --kind gs --n 8 --d 3 --delay exp:1ms -q --trace -";
  const auto a = testproc::capture("ALLCONCUR_SEED=7 " + kCli + args);
  const auto b = testproc::capture(kCli + args + " --seed 7");
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SimVerifyTrace) {
  const std::string path = temp_path("trace");
  ASSERT_EQ(testproc::capture(kCli + " sim run --scenario " + kScenarios + "/partition_3_2.json -q --trace " + path).status, 0);
  const auto r = cli("sim verify " + path);
  std::remove(path.c_str());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("PASS partition"), std::string::npos) << r.out;
}

TEST(Cli, SimExplore) {
  const auto r = cli("sim explore --n 3 --f 1");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("executions="), std::string::npos);
  EXPECT_NE(r.out.find(", all pass"), std::string::npos) << r.out;
  EXPECT_NE(cli("sim explore --n 4 --f 3").status, 0);
}

TEST(Cli, SimSweep) {
  const auto r = testproc::capture(kCli + " sim sweep --kind binomial --n 9 --runs 30 --threads 3");
  EXPECT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "seed,f,rounds,crashed,max_depth,verdict,failed");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",pass,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 30u);
}

TEST(Cli, ModelTable2) {
  const auto r = cli("model table2");
  EXPECT_EQ(r.status, 0);
  for (const char* row : {"6,3,2,2,", "11,3,3,2,", "45,4,4,3,", "128,5,4,3,", "512,8,3,3,", "1024,11,4,3,"}) {
    EXPECT_NE(r.out.find(std::string("\n") + row), std::string::npos) << row;
  }
}

TEST(Cli, ModelReliability) {
  const auto r = cli("model reliability --n 256 --mttf 2y --delta 24h --target 6nines");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("d=7"), std::string::npos) << r.out;
}

TEST(Cli, ModelAccuracy) {
  const auto r = cli("model accuracy --hb 10ms --to 100ms --n 32 --d 4 --dist exp:10ms");
  EXPECT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string header, value;
  std::getline(in, header);
  std::getline(in, value);
  EXPECT_EQ(header, "closed_form");
  const double p = std::stod(value);
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

TEST(Cli, ModelLatencyCsv) {
  const auto r = cli("model latency --n 8,16 --d 3,4 --L 1.25us --o 0.38us");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("n,d,D,model_latency,work_bound\n8,3,2,", 0), 0u) << r.out;
}

TEST(Cli, ModelDepth) {
  const auto r = cli("model depth --n 256 --d 7 --o 1.8us --mttf 2y --rounds 1e6");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("probability=0.9999"), std::string::npos) << r.out;
}

TEST(Cli, BadInputsFail) {
  EXPECT_NE(cli("graph analyze --kind torus --n 4").status, 0);
  EXPECT_NE(cli("graph gen --kind gs --n 5 --d 3").status, 0);
  EXPECT_NE(cli("sim run --scenario /nonexistent.json").status, 0);
  EXPECT_NE(cli("model frobnicate").status, 0);
  EXPECT_NE(cli("").status, 0);
}
