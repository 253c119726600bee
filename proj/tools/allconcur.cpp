#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "allconcur/analysis.hpp"
#include "allconcur/fd.hpp"
#include "allconcur/graph_io.hpp"
#include "allconcur/node.hpp"
#include "allconcur/perfmodel.hpp"
#include "allconcur/simnet.hpp"
#include "allconcur/units.hpp"

using namespace allconcur;

namespace {

struct GraphArgs {
  std::string kind = "gs";
  std::size_t n = 8;
  std::size_t d = 3;
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "complete | binomial | gs")->capture_default_str();
    app->add_option("--n", n, "vertex count")->capture_default_str();
    app->add_option("--d", d, "degree (gs only)")->capture_default_str();
    app->add_option("--graph-file", file, "read a DOT or adjacency file instead of building one");
  }

  Digraph build(std::string* label = nullptr) const {
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw std::runtime_error("cannot open " + file);
      std::stringstream ss;
      ss << in.rdbuf();
      const std::string text = ss.str();
      if (label) *label = file;
      return text.find("digraph") != std::string::npos ? parse_dot(text) : parse_adjacency(text);
    }
    const GraphKind k = parse_graph_kind(kind);
    if (label) *label = to_string(k) + " n=" + std::to_string(n) + (k == GraphKind::Gs ? " d=" + std::to_string(d) : "");
    return build_overlay(k, n, d);
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ALLCONCUR_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// "6nines" or a probability such as 0.999999.
double parse_target(const std::string& text) {
  if (text.size() > 5 && text.substr(text.size() - 5) == "nines") {
    return 1.0 - std::pow(10.0, -std::stod(text.substr(0, text.size() - 5)));
  }
  return std::stod(text);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(part);
  return out;
}

std::uint32_t max_depth(const Trace& t) {
  std::uint32_t worst = 0;
  for (const auto& [round, per] : t.stats) {
    for (const auto& [id, s] : per) worst = std::max(worst, s.depth_hops);
  }
  return worst;
}

// ---- graph ----

void add_graph(CLI::App& root) {
  auto* graph = root.add_subcommand("graph", "build and analyze overlays")->require_subcommand(1);

  auto* gen = graph->add_subcommand("gen", "print an overlay as DOT or adjacency list");
  auto gargs = std::make_shared<GraphArgs>();
  auto format = std::make_shared<std::string>("dot");
  auto out = std::make_shared<std::string>();
  gargs->add(gen);
  gen->add_option("--format", *format, "dot | adjacency")->capture_default_str();
  gen->add_option("-o,--output", *out, "output file (default stdout)");
  gen->callback([=] {
    const Digraph g = gargs->build();
    if (*format == "dot") {
      write_output(*out, to_dot(g));
    } else if (*format == "adjacency") {
      write_output(*out, to_adjacency(g));
    } else {
      throw CLI::ValidationError("--format", "expected dot or adjacency");
    }
  });

  auto* an = graph->add_subcommand("analyze", "diameter, Moore bound, connectivity and fault bounds");
  auto aargs = std::make_shared<GraphArgs>();
  auto fs = std::make_shared<std::vector<std::size_t>>();
  auto sample = std::make_shared<std::size_t>(0);
  auto seed = std::make_shared<std::uint64_t>(default_seed());
  auto brute = std::make_shared<bool>(false);
  aargs->add(an);
  an->add_option("--f", *fs, "failure counts to bound, comma separated")->delimiter(',');
  an->add_option("--sample", *sample, "estimate from this many random pairs");
  an->add_option("--seed", *seed, "sampling seed")->capture_default_str();
  an->add_flag("--bruteforce", *brute, "also compute the exact fault diameter (n <= 12)");
  an->callback([=] {
    const Digraph g = aargs->build();
    EstimateOptions opts;
    if (*sample) opts.sample_pairs = *sample;
    opts.seed = *seed;
    const GraphReport r = analyze(g, *fs, opts);
    std::cout << "n=" << r.n << " d=" << r.d << " D=" << r.diameter << " DL=" << r.moore_lower << " k=" << r.connectivity
              << "\n";
    for (const auto& fb : r.fault) {
      std::cout << "f=" << fb.f << " avg_lower=" << fb.avg_lower.to_string() << " delta_hat=" << fb.delta_hat;
      if (*brute) std::cout << " bruteforce=" << fault_diameter_bruteforce(g, fb.f);
      std::cout << "\n";
    }
  });
}

// ---- sim ----

struct InlineScenario {
  GraphArgs graph;
  std::vector<std::string> crashes;
  std::vector<std::string> crash_after;
  std::vector<std::string> cuts;
  std::string mode = "perfect";
  std::string delay = "const:1ms";
  std::string fd_kind = "oracle";
  std::string hb = "10ms";
  std::string timeout = "100ms";
  std::string latency;
  std::string overhead = "0";
  std::string horizon = "60s";
  std::string policy = "prune";
  Round rounds = 1;
  std::uint64_t seed = default_seed();
  bool no_records = false;

  void add(CLI::App* app) {
    graph.add(app);
    app->add_option("--crash", crashes, "crash server s at time t: s@t (repeatable)");
    app->add_option("--crash-after", crash_after,
                    "crash s at its first send of round r's message from o, after reaching only the listed "
                    "servers: s:r:o:t1,t2 (repeatable)");
    app->add_option("--cut", cuts, "cut edge u->v at time t: u-v@t (repeatable)");
    app->add_option("--mode", mode, "perfect | eventual")->capture_default_str();
    app->add_option("--delay", delay, "const:<t> | uniform:<lo>:<hi> | exp:<mean>")->capture_default_str();
    app->add_option("--fd", fd_kind, "oracle | heartbeat")->capture_default_str();
    app->add_option("--hb", hb, "heartbeat period")->capture_default_str();
    app->add_option("--timeout", timeout, "heartbeat timeout")->capture_default_str();
    app->add_option("--latency", latency, "oracle detection latency (default: timeout)");
    app->add_option("--overhead", overhead, "per-message CPU overhead")->capture_default_str();
    app->add_option("--horizon", horizon, "virtual time limit")->capture_default_str();
    app->add_option("--policy", policy, "prune | rebuild")->capture_default_str();
    app->add_option("--rounds", rounds, "rounds to run")->capture_default_str();
    app->add_option("--seed", seed, "seed (default $ALLCONCUR_SEED or 1)");
    app->add_flag("--no-records", no_records, "keep counters only");
  }

  SimScenario build() const {
    std::string text;
    SimScenario s;
    s.graph = graph.build(&s.graph_label);
    s.name = "inline";
    s.mode = parse_fd_mode(mode);
    s.seed = seed;
    s.delay = DelayModel::parse(delay, seed);
    s.fd.kind = parse_fd_kind(fd_kind);
    s.fd.hb_period = parse_duration(hb);
    s.fd.timeout = parse_duration(timeout);
    if (!latency.empty()) s.fd.detection_latency = parse_duration(latency);
    s.overhead = parse_duration(overhead);
    s.horizon = to_nanos(parse_duration(horizon));
    s.rounds = rounds;
    s.record_events = !no_records;
    if (policy == "rebuild") {
      s.policy.kind = MembershipPolicy::Kind::Rebuild;
    } else if (policy != "prune") {
      throw CLI::ValidationError("--policy", "expected prune or rebuild");
    }
    for (const auto& c : crashes) {
      const auto at = c.find('@');
      if (at == std::string::npos) throw CLI::ValidationError("--crash", "expected s@t, got " + c);
      CrashPlan p;
      p.server = static_cast<ServerId>(std::stoul(c.substr(0, at)));
      p.at = to_nanos(parse_duration(c.substr(at + 1)));
      s.crashes.push_back(p);
    }
    for (const auto& c : crash_after) {
      const auto parts = split(c, ':');
      if (parts.size() < 3 || parts.size() > 4) throw CLI::ValidationError("--crash-after", "expected s:r:o:t1,t2");
      CrashPlan p;
      p.trigger = CrashPlan::Trigger::AfterSending;
      p.server = static_cast<ServerId>(std::stoul(parts[0]));
      p.round = static_cast<Round>(std::stoul(parts[1]));
      p.origin = static_cast<ServerId>(std::stoul(parts[2]));
      if (parts.size() == 4) {
        for (const auto& t : split(parts[3], ',')) {
          if (!t.empty()) p.to.push_back(static_cast<ServerId>(std::stoul(t)));
        }
      }
      s.crashes.push_back(p);
    }
    for (const auto& c : cuts) {
      const auto dash = c.find('-');
      const auto at = c.find('@');
      if (dash == std::string::npos) throw CLI::ValidationError("--cut", "expected u-v@t, got " + c);
      EdgeCut e;
      e.from = static_cast<ServerId>(std::stoul(c.substr(0, dash)));
      e.to = static_cast<ServerId>(std::stoul(c.substr(dash + 1, at == std::string::npos ? std::string::npos : at - dash - 1)));
      e.at = at == std::string::npos ? 0 : to_nanos(parse_duration(c.substr(at + 1)));
      s.cuts.push_back(e);
    }
    s.validate();
    return s;
  }
};

int report(const Verdicts& v, bool quiet) {
  if (!quiet) std::cerr << v.summary();
  return v.all_pass() ? 0 : 1;
}

void add_sim(CLI::App& root, int& status) {
  auto* sim = root.add_subcommand("sim", "discrete-event simulation")->require_subcommand(1);

  auto* run_cmd = sim->add_subcommand("run", "simulate a scenario and check it");
  auto inl = std::make_shared<InlineScenario>();
  auto scenario = std::make_shared<std::string>();
  auto trace_out = std::make_shared<std::string>("-");
  auto quiet = std::make_shared<bool>(false);
  auto seed_opt = std::make_shared<std::optional<std::uint64_t>>();
  run_cmd->add_option("--scenario", *scenario, "scenario JSON file");
  inl->add(run_cmd);
  run_cmd->add_option("--trace", *trace_out, "trace output file, '-' for stdout, '' to discard")->capture_default_str();
  run_cmd->add_flag("-q,--quiet", *quiet, "do not print the verdicts");
  run_cmd->callback([=, &status] {
    SimScenario s;
    if (!scenario->empty()) {
      s = load_scenario(read_file(*scenario));
      if (run_cmd->count("--seed")) {
        s.seed = inl->seed;
        s.delay.seed = inl->seed;
      }
      if (inl->no_records) s.record_events = false;
    } else {
      s = inl->build();
    }
    const Trace t = run(s);
    if (!trace_out->empty()) write_output(*trace_out, t.to_jsonl());
    status = report(verify(t), *quiet);
  });

  auto* ver = sim->add_subcommand("verify", "check a recorded trace");
  auto trace_in = std::make_shared<std::string>();
  ver->add_option("trace", *trace_in, "trace JSONL file ('-' for stdin)")->required();
  ver->callback([=, &status] {
    const Trace t = Trace::from_jsonl(read_file(*trace_in));
    const Verdicts v = verify(t);
    std::cout << v.summary();
    status = v.all_pass() ? 0 : 1;
  });

  auto* ex = sim->add_subcommand("explore", "exhaustive interleaving search for small systems");
  auto eopts = std::make_shared<ExploreOptions>();
  auto eargs = std::make_shared<GraphArgs>();
  eargs->kind = "complete";
  eargs->n = 3;
  ex->add_option("--n", eopts->n, "servers (<= 5)")->capture_default_str();
  ex->add_option("--f", eopts->f, "crash victims")->capture_default_str();
  ex->add_option("--kind", eargs->kind, "overlay kind")->capture_default_str();
  ex->add_option("--d", eargs->d, "degree (gs only)");
  ex->add_option("--cap", eopts->state_cap, "state cap")->capture_default_str();
  ex->callback([=, &status] {
    eargs->n = eopts->n;
    eopts->graph = eargs->build();
    const ExploreResult r = explore(*eopts);
    std::cout << "states=" << r.states << " executions=" << r.executions << " agreement_violations="
              << r.agreement_violations << " order_violations=" << r.order_violations
              << " integrity_violations=" << r.integrity_violations << " liveness_violations=" << r.liveness_violations
              << (r.partial ? " partial" : "") << ", " << (r.all_pass() ? "all pass" : "FAIL " + r.first_violation)
              << "\n";
    status = r.all_pass() ? 0 : 1;
  });

  auto* sw = sim->add_subcommand("sweep", "many seeded random fault scenarios in parallel");
  auto sargs = std::make_shared<GraphArgs>();
  auto runs = std::make_shared<std::size_t>(100);
  auto base_seed = std::make_shared<std::uint64_t>(default_seed());
  auto threads = std::make_shared<unsigned>(std::max(1u, std::thread::hardware_concurrency()));
  auto fixed_f = std::make_shared<std::optional<std::size_t>>();
  auto max_rounds = std::make_shared<Round>(3);
  auto delay_kind = std::make_shared<std::string>("const");
  sargs->add(sw);
  sw->add_option("--runs", *runs, "scenarios")->capture_default_str();
  sw->add_option("--seed", *base_seed, "first seed")->capture_default_str();
  sw->add_option("--threads", *threads, "worker threads")->capture_default_str();
  sw->add_option("--f", *fixed_f, "victims per run (default: uniform in [0, k-1])");
  sw->add_option("--max-rounds", *max_rounds, "rounds drawn from 1..max")->capture_default_str();
  sw->add_option("--delay-kind", *delay_kind, "const | uniform | exp")->capture_default_str();
  sw->callback([=, &status] {
    const Digraph g = sargs->build();
    const std::size_t k = vertex_connectivity(g);
    RandomScenarioOptions opts;
    opts.max_rounds = *max_rounds;
    if (*delay_kind == "uniform") {
      opts.delay_kind = DelayModel::Kind::Uniform;
    } else if (*delay_kind == "exp") {
      opts.delay_kind = DelayModel::Kind::Exponential;
    } else if (*delay_kind != "const") {
      throw CLI::ValidationError("--delay-kind", "expected const, uniform or exp");
    }
    std::vector<std::string> rows(*runs);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < *runs; i = next++) {
        const std::uint64_t seed = *base_seed + i;
        const std::size_t f = fixed_f->has_value() ? **fixed_f : (k == 0 ? 0 : seed % k);
        const SimScenario s = random_scenario(g, f, seed, opts);
        const Trace t = run(s);
        const Verdicts v = verify(t);
        if (!v.all_pass()) ++failures;
        std::string failed;
        for (const auto& item : v.items) {
          if (!item.pass) failed += (failed.empty() ? "" : ";") + item.name;
        }
        rows[i] = std::to_string(seed) + "," + std::to_string(f) + "," + std::to_string(s.rounds) + "," +
                  std::to_string(t.crashed.size()) + "," + std::to_string(max_depth(t)) + "," +
                  (v.all_pass() ? "pass" : "fail") + "," + failed;
      }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < std::max(1u, *threads); ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    std::cout << "seed,f,rounds,crashed,max_depth,verdict,failed\n";
    for (const auto& r : rows) std::cout << r << "\n";
    std::cerr << *runs - failures << "/" << *runs << " scenarios pass\n";
    status = failures == 0 ? 0 : 1;
  });
}

// ---- model ----

void add_model(CLI::App& root) {
  auto* model = root.add_subcommand("model", "closed-form performance and reliability models")->require_subcommand(1);

  auto* lat = model->add_subcommand("latency", "LogP latency and work per round");
  auto ns = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{8});
  auto ds = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{3});
  auto L = std::make_shared<std::string>("1.2us");
  auto o = std::make_shared<std::string>("1.8us");
  auto gap = std::make_shared<std::string>("0");
  lat->add_option("--n", *ns, "server counts")->delimiter(',')->capture_default_str();
  lat->add_option("--d", *ds, "degrees (one, or one per n)")->delimiter(',')->capture_default_str();
  lat->add_option("--L", *L, "network latency")->capture_default_str();
  lat->add_option("--o", *o, "per-message overhead")->capture_default_str();
  lat->add_option("--g", *gap, "gap")->capture_default_str();
  lat->callback([=] {
    if (ds->size() != 1 && ds->size() != ns->size()) throw CLI::ValidationError("--d", "give one degree or one per n");
    std::vector<ModelRow> rows;
    for (std::size_t i = 0; i < ns->size(); ++i) {
      LogPParams p;
      p.L = parse_duration(*L);
      p.o = parse_duration(*o);
      p.g = parse_duration(*gap);
      p.n = (*ns)[i];
      p.d = ds->size() == 1 ? (*ds)[0] : (*ds)[i];
      p.D = diameter(build_gs(p.n, p.d));
      p.validate();
      rows.push_back(ModelRow{p.n, p.d, p.D, rbcast_time(p), work_bound(p)});
    }
    write_model_csv(std::cout, rows);
  });

  auto* rel = model->add_subcommand("reliability", "smallest G_S degree reaching a reliability target");
  auto rn = std::make_shared<std::size_t>(256);
  auto rd = std::make_shared<std::optional<std::size_t>>();
  auto mttf = std::make_shared<std::string>("2y");
  auto delta = std::make_shared<std::string>("24h");
  auto target = std::make_shared<std::string>("6nines");
  rel->add_option("--n", *rn, "servers")->capture_default_str();
  rel->add_option("--d", *rd, "evaluate this degree instead of choosing one");
  rel->add_option("--mttf", *mttf, "server MTTF")->capture_default_str();
  rel->add_option("--delta", *delta, "period")->capture_default_str();
  rel->add_option("--target", *target, "e.g. 6nines or 0.999999")->capture_default_str();
  rel->callback([=] {
    const ReliabilityParams rp{parse_duration(*mttf), parse_duration(*delta)};
    const std::size_t d = rd->has_value() ? **rd : choose_degree(*rn, parse_target(*target), rp);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", reliability(*rn, d, rp.p_f()));
    std::cout << "n=" << *rn << " d=" << d << " p_f=" << rp.p_f() << " reliability=" << buf << "\n";
  });

  auto* acc = model->add_subcommand("accuracy", "probability that no heartbeat timeout fires within one window");
  auto hb = std::make_shared<std::string>("10ms");
  auto to = std::make_shared<std::string>("100ms");
  auto an = std::make_shared<std::size_t>(32);
  auto ad = std::make_shared<std::size_t>(4);
  auto dist = std::make_shared<std::string>("exp:10ms");
  auto trials = std::make_shared<std::size_t>(0);
  auto aseed = std::make_shared<std::uint64_t>(default_seed());
  acc->add_option("--hb", *hb, "heartbeat period")->capture_default_str();
  acc->add_option("--to", *to, "timeout")->capture_default_str();
  acc->add_option("--n", *an, "servers")->capture_default_str();
  acc->add_option("--d", *ad, "degree")->capture_default_str();
  acc->add_option("--dist", *dist, "heartbeat delay distribution")->capture_default_str();
  acc->add_option("--trials", *trials, "also estimate by Monte Carlo")->capture_default_str();
  acc->add_option("--seed", *aseed, "Monte Carlo seed")->capture_default_str();
  acc->callback([=] {
    FdConfig cfg;
    cfg.kind = FdKind::Heartbeat;
    cfg.hb_period = parse_duration(*hb);
    cfg.timeout = parse_duration(*to);
    cfg.validate();
    const DelayModel m = DelayModel::parse(*dist, *aseed);
    const double p = accuracy_probability(cfg, *an, *ad, [&](double t) { return m.tail(t); });
    std::cout.precision(12);
    std::cout << "closed_form";
    if (*trials) std::cout << ",mc_frequency,mc_sigma";
    std::cout << "\n" << p;
    if (*trials) {
      const AccuracyEstimate e = accuracy_monte_carlo(cfg, *an, *ad, m, *trials, *aseed);
      std::cout << "," << e.frequency() << "," << e.sigma();
    }
    std::cout << "\n";
  });

  auto* depth = model->add_subcommand("depth", "probability that no server fails during the rounds' depth");
  auto dn = std::make_shared<std::size_t>(256);
  auto dd = std::make_shared<std::size_t>(7);
  auto dov = std::make_shared<std::string>("1.8us");
  auto dmttf = std::make_shared<std::string>("2y");
  auto drounds = std::make_shared<double>(1e6);
  depth->add_option("--n", *dn, "servers")->capture_default_str();
  depth->add_option("--d", *dd, "degree")->capture_default_str();
  depth->add_option("--o", *dov, "per-message overhead")->capture_default_str();
  depth->add_option("--mttf", *dmttf, "server MTTF")->capture_default_str();
  depth->add_option("--rounds", *drounds, "rounds")->capture_default_str();
  depth->callback([=] {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f",
                  depth_within_faultdiameter_prob(*dn, *dd, parse_duration(*dov), parse_duration(*dmttf), *drounds));
    std::cout << "probability=" << buf << "\n";
  });

  auto* t2 = model->add_subcommand("table2", "G_S sizes for six-nines reliability");
  auto t2mttf = std::make_shared<std::string>("2y");
  auto t2delta = std::make_shared<std::string>("24h");
  t2->add_option("--mttf", *t2mttf, "server MTTF")->capture_default_str();
  t2->add_option("--delta", *t2delta, "period")->capture_default_str();
  t2->callback([=] {
    static const std::pair<std::size_t, std::size_t> kRows[] = {{6, 3},   {8, 3},   {11, 3},  {16, 4},  {22, 4},
                                                                 {32, 4},  {45, 4},  {64, 5},  {90, 5},  {128, 5},
                                                                 {256, 7}, {512, 8}, {1024, 11}};
    const ReliabilityParams rp{parse_duration(*t2mttf), parse_duration(*t2delta)};
    std::cout << "n,d,D,DL,reliability,d_for_target\n";
    for (const auto& [n, d] : kRows) {
      const Digraph g = build_gs(n, d);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.9f", reliability(n, d, rp.p_f()));
      std::cout << n << "," << d << "," << diameter(g) << "," << moore_lower_bound(n, d) << "," << buf << ","
                << choose_degree(n, 1 - 1e-6, rp) << "\n";
    }
  });
}

// ---- node ----

void add_node(CLI::App& root, int& status) {
  auto* node = root.add_subcommand("node", "run one server over TCP");
  auto opts = std::make_shared<NodeOptions>();
  auto members = std::make_shared<std::string>();
  auto kind = std::make_shared<std::string>("gs");
  auto degree = std::make_shared<std::size_t>(3);
  auto mode = std::make_shared<std::string>("perfect");
  auto crash = std::make_shared<std::optional<Round>>();
  auto hb = std::make_shared<std::string>("50ms");
  auto timeout = std::make_shared<std::string>("1s");
  auto linger = std::make_shared<std::string>("1s");
  auto deadline = std::make_shared<std::string>("60s");
  node->add_option("--id", opts->me, "this server's id")->required();
  node->add_option("--members", *members, "membership file: '<id> <host> <port>' lines")->required();
  node->add_option("--kind", *kind, "overlay kind")->capture_default_str();
  node->add_option("--d", *degree, "degree (gs only)")->capture_default_str();
  node->add_option("--rounds", opts->rounds, "rounds")->capture_default_str();
  node->add_option("--mode", *mode, "perfect | eventual")->capture_default_str();
  node->add_option("--crash-round", *crash, "exit abruptly on entering this round");
  node->add_option("--payload-prefix", opts->payload_prefix, "payload prefix")->capture_default_str();
  node->add_option("--hb", *hb, "heartbeat period")->capture_default_str();
  node->add_option("--timeout", *timeout, "silence before suspecting a predecessor")->capture_default_str();
  node->add_option("--linger", *linger, "keep relaying after the last round")->capture_default_str();
  node->add_option("--deadline", *deadline, "give up after this long")->capture_default_str();
  node->callback([=, &status] {
    opts->members = parse_membership(read_file(*members));
    opts->graph = build_overlay(parse_graph_kind(*kind), opts->members.size(), *degree);
    opts->mode = parse_fd_mode(*mode);
    opts->crash_round = *crash;
    opts->hb_period = parse_duration(*hb);
    opts->timeout = parse_duration(*timeout);
    opts->linger = parse_duration(*linger);
    opts->deadline = parse_duration(*deadline);
    status = run_node(*opts, std::cout);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AllConcur: leaderless concurrent atomic broadcast"};
  app.require_subcommand(1);
  int status = 0;
  add_graph(app);
  add_sim(app, status);
  add_model(app);
  add_node(app, status);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
