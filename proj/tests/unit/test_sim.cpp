#include <gtest/gtest.h>

#include <cmath>

#include "opart/sim.hpp"
#include "support.hpp"

using namespace opart;
using opart::test::load_latency;
using opart::test::load_workload;

namespace {

SimConfig mixed_config(int servers, std::uint64_t seed) {
  SimConfig c;
  c.spec = load_workload("workloads/ministore/workload_mixed.json");
  c.spec.seed = seed;
  c.latency = load_latency("config/latency_wan3.json");
  c.servers = servers;
  c.scenario = "mixed";
  return c;
}

std::uint64_t count(const Trace& t, EventType type) {
  return static_cast<std::uint64_t>(
      std::count_if(t.events.begin(), t.events.end(), [&](const Event& e) { return e.type == type; }));
}

}  // namespace

TEST(Rng, BoundedDrawsAndDeterminism) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t x = a.below(7);
    EXPECT_EQ(x, b.below(7));
    EXPECT_LT(x, 7u);
    std::int64_t y = a.between(-2, 2);
    b.between(-2, 2);
    EXPECT_GE(y, -2);
    EXPECT_LE(y, 2);
    double u = a.unit();
    b.unit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(Rng(1).below(1), 0u);
}

TEST(Latency, RttIsHalved) {
  LatencyMatrix m = load_latency("config/latency_wan3.json");
  ASSERT_EQ(m.size(), 3);
  EXPECT_DOUBLE_EQ(m.one_way(0, 1), 126.5);
  EXPECT_DOUBLE_EQ(m.one_way(2, 0), 46.0);
  EXPECT_DOUBLE_EQ(m.intra_site_one_way(1), 10.0);
  LatencyMatrix t3 = load_latency("config/latency_table3.json");
  EXPECT_EQ(t3.size(), 5);
  EXPECT_NO_THROW(t3.validate());
  EXPECT_DOUBLE_EQ(LatencyMatrix::single_site(20).intra_site_one_way(0), 10.0);
}

TEST(Latency, RejectsBadMatrices) {
  auto bad = [](const std::string& matrix, const std::string& extra = "") {
    return R"({"format": "opart-latency/1", "kind": "one_way", "sites": ["a", "b"], "intra_site_ms": 1,
               "matrix_ms": )" + matrix + extra + "}";
  };
  EXPECT_NO_THROW(LatencyMatrix::from_json(bad("[[0, 5], [5, 0]]")));
  EXPECT_THROW(LatencyMatrix::from_json(bad("[[0, 5], [6, 0]]")), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json(bad("[[0, -5], [-5, 0]]")), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json(bad("[[0, 0.5], [0.5, 0]]")), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json(bad("[[0, 5]]")), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json(bad("[[0, 5], [5, 0]]", R"(, "jitter_ms": -1)")), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json("{}"), ConfigError);
  EXPECT_THROW(LatencyMatrix::from_json("not json"), ConfigError);
}

TEST(Workload, ValidationErrors) {
  WorkloadSpec ok = load_workload("workloads/ministore/workload.json");
  EXPECT_NO_THROW(ok.validate());
  WorkloadSpec s = ok;
  s.mix["order"] += 0.1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ok;
  s.mix["ghost"] = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ok;
  s.params.erase("order");
  EXPECT_THROW(s.validate(), ConfigError);
  s = ok;
  s.warmup_ms = s.duration_ms;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(WorkloadSpec::from_json(R"({"format": "opart-workload/1", "bogus": 1})", "."), ConfigError);
  EXPECT_THROW(WorkloadSpec::from_json(R"({"format": "x"})", "."), ConfigError);
  EXPECT_THROW(fault_from_string("meteor"), ConfigError);
}

TEST(Workload, SyntheticLocalRatioSplitsMix) {
  WorkloadSpec s = load_workload("workloads/synthetic/workload.json");
  s.local_ratio = 0.7;
  auto m = s.effective_mix();
  EXPECT_NEAR(m.at("local_op"), 0.7, 1e-12);
  EXPECT_NEAR(m.at("global_op"), 0.3, 1e-12);
}

TEST(Workload, InitialDatabaseFollowsPopulate) {
  WorkloadSpec s = load_workload("workloads/ministore/workload_mixed.json");
  Database db = initial_database(s);
  const auto& items = db.table("ITEMS").rows();
  ASSERT_EQ(items.size(), 4u);
  EXPECT_EQ(items.begin()->second[0], Value{std::int64_t{0}});
  EXPECT_EQ(items.begin()->second[1], Value{std::string("item-0")});
  EXPECT_EQ(items.begin()->second[2], Value{std::int64_t{50}});
}

TEST(Simulation, SingleServerLocalAndGlobalAreClose) {
  SimConfig c;
  c.spec = load_workload("workloads/ministore/workload.json");
  c.spec.duration_ms = 10000;
  c.spec.record_trace = false;
  c.servers = 1;
  SimResult r = simulate(c);
  const ClassMetrics* local = r.metrics.find("local");
  const ClassMetrics* global = r.metrics.find("global");
  ASSERT_TRUE(local && global);
  ASSERT_GT(local->count, 0u);
  ASSERT_GT(global->count, 0u);
  EXPECT_LT(std::abs(global->mean_ms - local->mean_ms), 0.5 * local->mean_ms)
      << "local " << local->mean_ms << " global " << global->mean_ms;
}

TEST(Simulation, EveryRequestIsAccountedFor) {
  SimResult r = simulate(mixed_config(3, 3));
  const auto& m = r.metrics;
  EXPECT_EQ(m.issued, 200u);
  EXPECT_EQ(m.in_flight, 0u);
  EXPECT_EQ(m.replies, m.issued);
  EXPECT_EQ(count(r.trace, EventType::Reply), m.replies);
  EXPECT_EQ(count(r.trace, EventType::Map), m.maps);
  EXPECT_EQ(count(r.trace, EventType::Req), m.replies + m.maps);
  EXPECT_GT(m.maps, 0u);
  EXPECT_EQ(count(r.trace, EventType::Final), 3u);
}

TEST(Simulation, EventsAreCausal) {
  SimResult r = simulate(mixed_config(3, 4));
  std::map<std::uint64_t, std::int64_t> first_req;
  std::map<std::uint64_t, std::int64_t> first_append;
  std::set<std::pair<int, std::uint64_t>> begun;
  std::int64_t last_t = 0;
  std::uint64_t expected_seq = 0;
  for (const auto& e : r.trace.events) {
    EXPECT_GE(e.t_us, last_t);
    EXPECT_EQ(e.seq, expected_seq++);
    last_t = e.t_us;
    switch (e.type) {
      case EventType::Req: first_req.try_emplace(e.op, e.t_us); break;
      case EventType::ExecBegin: begun.insert({e.server, e.op}); break;
      case EventType::Commit: EXPECT_TRUE(begun.count({e.server, e.op})) << e.op; break;
      case EventType::Reply: EXPECT_TRUE(first_req.count(e.op)) << e.op; break;
      case EventType::Append: first_append.try_emplace(e.op, e.t_us); break;
      case EventType::Apply: EXPECT_TRUE(first_append.count(e.op)) << e.op; break;
      default: break;
    }
  }
}

TEST(Simulation, TokenVisitsEveryServer) {
  SimResult r = simulate(mixed_config(3, 5));
  ASSERT_EQ(r.metrics.token.size(), 3u);
  for (const auto& t : r.metrics.token) {
    EXPECT_GT(t.epochs, 0u);
    EXPECT_TRUE(std::isfinite(t.max_gap_ms));
    EXPECT_GT(t.max_gap_ms, 0.0);
  }
  // The ring is 0 -> 1 -> 2 -> 0.
  for (const auto& e : r.trace.events) {
    if (e.type == EventType::TokenPass) {
      EXPECT_EQ(e.target, (e.server + 1) % 3);
    }
  }
}

TEST(Simulation, SameSeedSameBytes) {
  SimResult a = simulate(mixed_config(3, 9));
  SimResult b = simulate(mixed_config(3, 9));
  EXPECT_EQ(a.trace.to_jsonl(), b.trace.to_jsonl());
  EXPECT_EQ(a.metrics.csv_rows(), b.metrics.csv_rows());
  EXPECT_EQ(a.metrics.to_json(), b.metrics.to_json());
  SimResult c = simulate(mixed_config(3, 10));
  EXPECT_NE(a.trace.to_jsonl(), c.trace.to_jsonl());
}

TEST(Simulation, TraceRoundTrips) {
  SimResult a = simulate(mixed_config(2, 1));
  std::string text = a.trace.to_jsonl();
  EXPECT_EQ(Trace::from_jsonl(text).to_jsonl(), text);
}

TEST(Simulation, MetricsCsvShape) {
  EXPECT_EQ(MetricsReport::csv_header(), "scenario,servers,clients,class,throughput,mean_ms,p50_ms,p99_ms\n");
  SimResult a = simulate(mixed_config(3, 2));
  std::string rows = a.metrics.csv_rows();
  std::size_t lines = static_cast<std::size_t>(std::count(rows.begin(), rows.end(), '\n'));
  EXPECT_EQ(lines, a.metrics.classes.size());
  EXPECT_EQ(rows.rfind("mixed,3,", 0), 0u);
}

TEST(Saturation, ZeroCapGivesZero) {
  SimConfig c;
  c.spec = load_workload("workloads/synthetic/workload.json");
  c.latency = load_latency("config/latency_wan3.json");
  c.servers = 3;
  EXPECT_DOUBLE_EQ(find_saturation(c, 0.0).throughput, 0.0);
}

TEST(Saturation, MoreServersDoNotHurtMostlyLocalLoad) {
  SimConfig c;
  c.spec = load_workload("workloads/ministore/workload.json");
  c.latency = load_latency("config/latency_wan3.json");
  c.servers = 3;
  SaturationResult three = find_saturation(c, 2000.0);
  c.servers = 6;
  SaturationResult six = find_saturation(c, 2000.0);
  EXPECT_GT(three.throughput, 0.0);
  EXPECT_GE(six.throughput, three.throughput)
      << "three " << three.throughput << " six " << six.throughput;
}
