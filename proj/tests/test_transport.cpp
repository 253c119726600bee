#include <gtest/gtest.h>

#include "json.hpp"
#include <sstream>
#include <thread>

#include "allconcur/node.hpp"
#include "proc.hpp"

using namespace allconcur;

TEST(Membership, ParsesFile) {
  const auto m = parse_membership("# cluster\n0 127.0.0.1 9000\n\n1 localhost 9001\n");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[1].host, "localhost");
  EXPECT_EQ(m[1].port, 9001);
}

TEST(Membership, RejectsBadFiles) {
  EXPECT_THROW(parse_membership("0 a 1\n0 b 2\n"), NodeError);
  EXPECT_THROW(parse_membership("0 a 1\n2 b 2\n"), NodeError);
  EXPECT_THROW(parse_membership("0 a notaport\n"), NodeError);
  EXPECT_THROW(parse_membership("0 a 70000\n1 b 2\n"), NodeError);
}

TEST(Node, ThreeLoopbackServersAgree) {
  const auto ports = testproc::free_ports(3);
  const auto members = parse_membership(testproc::membership(ports));
  std::vector<std::ostringstream> outs(3);
  std::vector<int> codes(3, -1);
  std::vector<std::thread> threads;
  for (ServerId i = 0; i < 3; ++i) {
    threads.emplace_back([&, i] {
      NodeOptions opts;
      opts.me = i;
      opts.members = members;
      opts.graph = build_complete(3);
      opts.rounds = 2;
      opts.hb_period = 0.02;
      opts.timeout = 0.5;
      opts.linger = 0.3;
      opts.deadline = 20;
      codes[i] = run_node(opts, outs[i]);
    });
  }
  for (auto& t : threads) t.join();
  std::vector<std::string> lines;
  for (ServerId i = 0; i < 3; ++i) {
    EXPECT_EQ(codes[i], 0) << i;
    std::istringstream in(outs[i].str());
    std::vector<nlohmann::json> rounds;
    for (std::string line; std::getline(in, line);) rounds.push_back(nlohmann::json::parse(line));
    ASSERT_EQ(rounds.size(), 2u) << i;
    for (const auto& r : rounds) EXPECT_EQ(r["server"], i);
    EXPECT_EQ(rounds[0]["batch"].size(), 3u);
    EXPECT_EQ(rounds[1]["batch"][2]["payload"], "p2r2");
    rounds[0].erase("server");
    rounds[1].erase("server");
    lines.push_back(rounds[0].dump() + rounds[1].dump());
  }
  EXPECT_EQ(lines[0], lines[1]);
  EXPECT_EQ(lines[1], lines[2]);
}

TEST(Node, RejectsUnknownSelf) {
  NodeOptions opts;
  opts.me = 4;
  opts.members = parse_membership("0 127.0.0.1 1\n1 127.0.0.1 2\n");
  opts.graph = build_complete(2);
  std::ostringstream out;
  EXPECT_THROW(run_node(opts, out), NodeError);
}

TEST(Node, CliRejectsDuplicateIds) {
  char path[] = "/tmp/allconcur_dupXXXXXX";
  const int fd = ::mkstemp(path);
  ASSERT_GE(fd, 0);
  const std::string text = "0 127.0.0.1 1\n0 127.0.0.1 2\n";
  ASSERT_EQ(::write(fd, text.data(), text.size()), static_cast<ssize_t>(text.size()));
  ::close(fd);
  const auto r = testproc::capture(std::string(ALLCONCUR_CLI) + " node --id 0 --members " + path + " 2>/dev/null");
  ::unlink(path);
  EXPECT_NE(r.status, 0);
}
