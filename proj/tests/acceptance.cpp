// One PASS/FAIL line per acceptance criterion. Pass criterion numbers as
// arguments to run a subset.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include <atomic>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "allconcur/analysis.hpp"
#include "allconcur/perfmodel.hpp"
#include "allconcur/protocol.hpp"
#include "allconcur/simnet.hpp"
#include "allconcur/units.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "proc.hpp"

extern char** environ;

using namespace allconcur;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Row {
  std::size_t n, d, D, DL;
};

const Row kTable2[] = {{6, 3, 2, 2},   {8, 3, 2, 2},   {11, 3, 3, 2},  {16, 4, 2, 2},  {22, 4, 3, 3},
                       {32, 4, 3, 3},  {45, 4, 4, 3},  {64, 5, 4, 3},  {90, 5, 3, 3},  {128, 5, 4, 3},
                       {256, 7, 4, 3}, {512, 8, 3, 3}, {1024, 11, 4, 3}};

Outcome table2() {
  const auto start = Clock::now();
  std::string bad;
  for (const auto& row : kTable2) {
    const Digraph g = build_gs(row.n, row.d);
    const std::size_t D = diameter(g);
    const std::size_t DL = moore_lower_bound(row.n, row.d);
    if (D != row.D || DL != row.DL) {
      bad += " G_S(" + std::to_string(row.n) + "," + std::to_string(row.d) + ") D=" + std::to_string(D) +
             " DL=" + std::to_string(DL);
    }
    if (row.n <= 256) {
      const std::size_t k = vertex_connectivity(g);
      if (k != row.d) bad += " k(G_S(" + std::to_string(row.n) + "," + std::to_string(row.d) + "))=" + std::to_string(k);
    }
  }
  const double took = seconds_since(start);
  if (took >= 300) bad += " too slow";
  char buf[64];
  std::snprintf(buf, sizeof buf, "13 rows, %.1fs", took);
  return {bad.empty(), bad.empty() ? buf : bad};
}

Outcome binomial_benchmark() {
  const Digraph g = build_binomial(12);
  const auto d = g.regular_degree();
  const std::size_t k = vertex_connectivity(g);
  const std::size_t D = diameter(g);
  const auto est = fault_diameter_estimate(g, 5);
  const bool pass = d == 6u && k == 6 && D == 2 && est.delta_hat == 4 && est.avg_lower.ceil() >= 3;
  return {pass, "d=" + std::to_string(d.value_or(0)) + " k=" + std::to_string(k) + " D=" + std::to_string(D) +
                    " delta_hat=" + std::to_string(est.delta_hat) + " avg_lower=" + est.avg_lower.to_string() +
                    " (ceil " + std::to_string(est.avg_lower.ceil()) + ")"};
}

Outcome sandwich() {
  const auto start = Clock::now();
  std::vector<std::pair<std::string, Digraph>> family;
  for (std::size_t n = 2; n <= 10; ++n) family.emplace_back("K" + std::to_string(n), build_complete(n));
  for (std::size_t n = 3; n <= 10; ++n) family.emplace_back("binomial(" + std::to_string(n) + ")", build_binomial(n));
  for (std::size_t d = 3; 2 * d <= 10; ++d) {
    for (std::size_t n = 2 * d; n <= 10; ++n) {
      family.emplace_back("G_S(" + std::to_string(n) + "," + std::to_string(d) + ")", build_gs(n, d));
    }
  }
  std::size_t cases = 0;
  std::string bad;
  for (const auto& [name, g] : family) {
    if (!g.is_simple()) continue;
    const std::size_t k = vertex_connectivity(g);
    for (std::size_t f = 0; f < k; ++f) {
      const auto est = fault_diameter_estimate(g, f);
      const std::size_t exact = fault_diameter_bruteforce(g, f);
      ++cases;
      if (exact > est.delta_hat || !(est.avg_lower <= est.delta_hat)) {
        bad += " " + name + " f=" + std::to_string(f);
      }
    }
  }
  const double took = seconds_since(start);
  if (took >= 120) bad += " too slow";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu graphs, %zu (graph,f) cases, %.1fs", family.size(), cases, took);
  return {bad.empty(), bad.empty() ? buf : bad};
}

template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Outcome random_protocol() {
  const std::vector<std::pair<std::string, Digraph>> graphs{
      {"K4", build_complete(4)}, {"binomial(9)", build_binomial(9)}, {"G_S(8,3)", build_gs(8, 3)}, {"G_S(16,4)", build_gs(16, 4)}};
  std::string detail, bad;
  for (const auto& [name, g] : graphs) {
    const std::size_t k = vertex_connectivity(g);
    std::atomic<std::size_t> fails{0}, no_fault_runs{0};
    std::atomic<std::uint32_t> worst_depth{0};
    std::mutex mu;
    std::string first;
    parallel_for(1000, [&](std::size_t i) {
      const std::uint64_t seed = 1 + i;
      std::mt19937_64 rng(seed * 7919);
      const std::size_t f = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
      const Trace t = run(random_scenario(g, f, seed));
      const Verdicts v = verify(t);
      if (t.crashed.empty()) ++no_fault_runs;
      for (const auto& [round, per] : t.stats) {
        for (const auto& [id, st] : per) {
          std::uint32_t cur = worst_depth.load();
          while (st.depth_hops > cur && !worst_depth.compare_exchange_weak(cur, st.depth_hops)) {
          }
        }
      }
      bool ok = v.all_pass();
      for (const char* name : {"integrity", "agreement", "total_order", "validity", "depth_bound", "bcast_bound",
                               "foreign_bcast_exact", "fail_bound"}) {
        ok = ok && v.get(name).pass;
      }
      if (!ok) {
        ++fails;
        std::lock_guard<std::mutex> lock(mu);
        if (first.empty()) first = "seed " + std::to_string(seed) + ": " + v.summary();
      }
    });
    detail += " " + name + ": " + std::to_string(1000 - fails) + "/1000 (max depth " + std::to_string(worst_depth) +
              ", " + std::to_string(no_fault_runs) + " fault-free)";
    if (fails) bad += " " + name + " " + first;
  }
  return {bad.empty(), bad.empty() ? detail.substr(1) : bad};
}

Outcome exhaustive() {
  const auto start = Clock::now();
  std::string detail, bad;
  for (std::size_t n : {3u, 4u}) {
    for (std::size_t f : {0u, 1u}) {
      ExploreOptions opts;
      opts.n = n;
      opts.f = f;
      opts.state_cap = 200'000'000;
      const auto r = explore(opts);
      detail += " n=" + std::to_string(n) + ",f=" + std::to_string(f) + ": " + std::to_string(r.executions) +
                " executions/" + std::to_string(r.states) + " states";
      if (!r.all_pass()) bad += " n=" + std::to_string(n) + " f=" + std::to_string(f) + " " + r.first_violation +
                                (r.partial ? " (state cap reached)" : "");
    }
  }
  const double took = seconds_since(start);
  if (took >= 600) bad += " too slow";
  char buf[32];
  std::snprintf(buf, sizeof buf, "; %.0fs", took);
  return {bad.empty(), (bad.empty() ? detail.substr(1) : bad) + buf};
}

Outcome tracking_script() {
  using Edges = std::set<std::pair<ServerId, ServerId>>;
  ServerConfig cfg;
  cfg.me = 6;
  cfg.overlay = Overlay::dense(build_binomial(9));
  cfg.max_rounds = 1;
  Server p6(cfg);
  std::string bad;
  auto expect = [&](const std::string& step, ServerId origin, const std::set<ServerId>& v, const Edges& e) {
    if (p6.tracking(origin).vertices() != v || p6.tracking(origin).edges() != e) bad += " " + step;
  };
  p6.receive(2, Fail{1, 0, 2});
  expect("1:g[p0]", 0, {0, 1, 4, 5, 7, 8}, {{0, 1}, {0, 4}, {0, 5}, {0, 7}, {0, 8}});
  expect("1:g[p1]", 1, {1}, {});
  p6.receive(5, Fail{1, 0, 5});
  expect("2:g[p0]", 0, {0, 1, 4, 7, 8}, {{0, 1}, {0, 4}, {0, 7}, {0, 8}});
  expect("2:g[p1]", 1, {1}, {});
  p6.receive(4, Fail{1, 1, 3});
  const std::set<ServerId> all_but_3{0, 1, 2, 4, 5, 6, 7, 8};
  const Edges both{{0, 1}, {0, 4}, {0, 7}, {0, 8}, {1, 0}, {1, 2}, {1, 5}, {1, 6}, {1, 8}};
  expect("3:g[p0]", 0, all_but_3, both);
  expect("3:g[p1]", 1, all_but_3, both);
  p6.receive(2, Bcast{1, 1, "m1"});
  expect("4:g[p1]", 1, {}, {});
  expect("4:g[p0]", 0, all_but_3, both);
  return {bad.empty(), bad.empty() ? "four events, vertex and edge sets of g6[p0] and g6[p1] after each" : "mismatch at" + bad};
}

Outcome beyond_connectivity() {
  const Digraph g = build_gs(8, 3);
  std::atomic<std::size_t> violations{0}, delivering_runs{0};
  parallel_for(100, [&](std::size_t i) {
    const std::size_t f = 3 + i % 4;  // 3..6 of 8 servers, all >= k = 3
    const Trace t = run(random_scenario(g, f, 5000 + i));
    const Verdicts v = verify(t);
    if (!v.get("agreement").pass || !v.get("integrity").pass || !v.get("total_order").pass) ++violations;
    for (const auto& [round, per] : t.stats) {
      for (const auto& [id, st] : per) {
        if (st.delivered) {
          ++delivering_runs;
          return;
        }
      }
    }
  });
  return {violations == 0, "G_S(8,3), f in 3..6: " + std::to_string(100 - violations) + "/100 agree (" +
                               std::to_string(delivering_runs) + " runs with deliveries)"};
}

Outcome partition_gate() {
  std::string bad, detail;
  for (const auto& [file, majority] : std::vector<std::pair<std::string, std::set<ServerId>>>{
           {"partition_3_2.json", {0, 1, 2}}, {"partition_2_2.json", {}}}) {
    const Trace t = run(load_scenario(slurp(std::string(ALLCONCUR_SCENARIOS) + "/" + file)));
    const Verdicts v = verify(t);
    std::set<ServerId> delivered;
    for (const auto& [round, per] : t.stats) {
      for (const auto& [id, st] : per) {
        if (st.delivered) delivered.insert(id);
      }
    }
    if (delivered != majority || !v.get("partition").pass || !v.get("agreement").pass) bad += " " + file;
    detail += " " + file + ": " + std::to_string(delivered.size()) + " delivered";
  }
  return {bad.empty(), bad.empty() ? detail.substr(1) : "unexpected outcome in" + bad};
}

Outcome depth_probability() {
  using Big = boost::multiprecision::cpp_dec_float_100;
  const double mttf = parse_duration("2y");
  const double closed = depth_within_faultdiameter_prob(256, 7, 1.8e-6, mttf, 1e6);
  const Big exact = exp(-Big(256) * Big(7) * Big("1.8e-6") / Big(mttf) * Big(1000000));
  const double reference = static_cast<double>(exact);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.9f (100-digit reference %.9f)", closed, reference);
  return {closed > 0.9999 && reference > 0.9999 && std::abs(closed - reference) < 1e-12, buf};
}

Outcome accuracy() {
  std::string detail;
  bool pass = true;
  const DelayModel m = DelayModel::exponential(0.010, 1);
  for (double timeout : {0.100, 0.030}) {
    FdConfig cfg;
    cfg.kind = FdKind::Heartbeat;
    cfg.hb_period = 0.010;
    cfg.timeout = timeout;
    const double bound = accuracy_probability(cfg, 32, 4, [&](double t) { return m.tail(t); });
    const auto est = accuracy_monte_carlo(cfg, 32, 4, m, 100000, 2024);
    const bool ok = bound <= est.frequency() + 3 * est.sigma() + 1e-12;
    pass = pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%sto=%.0fms: bound %.6g <= MC %.6g +/- %.2g", detail.empty() ? "" : "; ",
                  timeout * 1000, bound, est.frequency(), est.sigma());
    detail += buf;
  }
  return {pass, detail};
}

Outcome reliability_check() {
  std::mt19937_64 rng(99);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 6 + rng() % 1019;
    const std::size_t k = 1 + rng() % 12;
    const double p = std::uniform_real_distribution<double>(1e-5, 0.05)(rng);
    worst = std::max(worst, std::abs(reliability(n, k, p) - oracle::binomial_tail(n, k, p)));
  }
  const ReliabilityParams rp{parse_duration("2y"), parse_duration("24h")};
  const std::size_t d256 = choose_degree(256, 1 - 1e-6, rp);
  const std::size_t d512 = choose_degree(512, 1 - 1e-6, rp);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |diff| %.2g over 50 triples; d(256)=%zu d(512)=%zu", worst, d256, d512);
  return {worst <= 1e-12 && d256 == 7 && d512 == 8, buf};
}

Outcome transport() {
  const auto start = Clock::now();
  const auto ports = testproc::free_ports(8);
  const std::string dir = "/tmp/allconcur_accept_" + std::to_string(::getpid());
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir + "/members.txt") << testproc::membership(ports);
  }
  constexpr ServerId kVictim = 5;
  std::vector<pid_t> pids;
  for (ServerId i = 0; i < 8; ++i) {
    std::vector<std::string> args{ALLCONCUR_CLI, "node",         "--id",      std::to_string(i), "--members",
                                  dir + "/members.txt", "--kind", "gs",        "--d",             "3",
                                  "--rounds",    "3",            "--hb",      "20ms",            "--timeout",
                                  "300ms",       "--linger",     "500ms",     "--deadline",      "25s"};
    if (i == kVictim) {
      args.push_back("--crash-round");
      args.push_back("2");
    }
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    const std::string out = dir + "/out" + std::to_string(i);
    posix_spawn_file_actions_addopen(&fa, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&fa, 2, (out + ".err").c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    pid_t pid = 0;
    if (posix_spawn(&pid, argv[0], &fa, nullptr, argv.data(), environ) != 0) return {false, "spawn failed"};
    posix_spawn_file_actions_destroy(&fa);
    pids.push_back(pid);
  }
  std::vector<int> codes(8, -1);
  for (std::size_t remaining = 8; remaining > 0;) {
    for (std::size_t i = 0; i < 8; ++i) {
      if (codes[i] != -1 || pids[i] == 0) continue;
      int status = 0;
      if (::waitpid(pids[i], &status, WNOHANG) == pids[i]) {
        codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
        --remaining;
      }
    }
    if (seconds_since(start) > 40) {
      for (std::size_t i = 0; i < 8; ++i) {
        if (codes[i] == -1) ::kill(pids[i], SIGKILL);
      }
      return {false, "nodes still running after 40s"};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  const double took = seconds_since(start);

  std::string bad;
  std::vector<std::string> reference;
  for (ServerId i = 0; i < 8; ++i) {
    if (i == kVictim) continue;
    if (codes[i] != 0) bad += " node " + std::to_string(i) + " exit " + std::to_string(codes[i]);
    std::istringstream in(slurp(dir + "/out" + std::to_string(i)));
    std::vector<std::string> rounds;
    bool tagged_victim = false;
    for (std::string line; std::getline(in, line);) {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      for (const auto& t : j["tagged"]) tagged_victim |= t.get<ServerId>() == kVictim;
      j.erase("server");
      rounds.push_back(j.dump());
    }
    if (rounds.size() != 3) bad += " node " + std::to_string(i) + " delivered " + std::to_string(rounds.size()) + " rounds";
    if (!tagged_victim) bad += " node " + std::to_string(i) + " never tagged " + std::to_string(kVictim);
    if (reference.empty()) {
      reference = rounds;
    } else if (rounds != reference) {
      bad += " node " + std::to_string(i) + " diverges";
    }
  }
  if (took >= 30) bad += " too slow";
  std::filesystem::remove_all(dir);
  char buf[96];
  std::snprintf(buf, sizeof buf, "7 survivors agree on 3 rounds and tag server %u; %.1fs wall", kVictim, took);
  return {bad.empty(), bad.empty() ? buf : bad.substr(1)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"G_S sizing rows: diameters, Moore bounds and connectivity", table2},
      {"binomial(12) benchmark", binomial_benchmark},
      {"fault-diameter sandwich on n <= 10", sandwich},
      {"random fault scenarios on four overlays", random_protocol},
      {"exhaustive interleavings, n <= 4, f <= 1", exhaustive},
      {"running-example tracking digraphs at p6", tracking_script},
      {"agreement with f >= k", beyond_connectivity},
      {"partition gate under eventual accuracy", partition_gate},
      {"depth within fault diameter probability", depth_probability},
      {"heartbeat accuracy bound vs Monte Carlo", accuracy},
      {"reliability tail and degree choice", reliability_check},
      {"TCP end-to-end, 8 processes, one crash", transport},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " | " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
