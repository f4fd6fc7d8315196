#include <gtest/gtest.h>

#include "json.hpp"
#include "mutants.hpp"
#include "opart/checker.hpp"
#include "opart/sim.hpp"
#include "support.hpp"

using namespace opart;
using opart::test::load_latency;
using opart::test::load_workload;

namespace {

SimConfig config(int servers, std::uint64_t seed, std::uint64_t max_ops = 200, Fault fault = Fault::None) {
  SimConfig c;
  c.spec = load_workload("workloads/ministore/workload_mixed.json");
  c.spec.seed = seed;
  c.spec.max_ops = max_ops;
  c.spec.fault = fault;
  c.latency = load_latency("config/latency_wan3.json");
  c.servers = servers;
  c.scenario = "checker";
  return c;
}

Trace run(int servers, std::uint64_t seed, std::uint64_t max_ops = 200, Fault fault = Fault::None) {
  return simulate(config(servers, seed, max_ops, fault)).trace;
}

Trace run_allowing_halt(const SimConfig& c, bool& halted) {
  try {
    halted = false;
    return simulate(c).trace;
  } catch (const SimulationHalted&) {
    halted = true;
    return {};
  }
}

}  // namespace

TEST(Checker, NominalRunPasses) {
  for (std::uint64_t seed : {1, 2, 3}) {
    CheckReport r = check_trace(run(3, seed));
    EXPECT_TRUE(r.pass()) << r.to_json();
    for (const char* p : kPoProperties) EXPECT_TRUE(r.po.get(p).pass) << p;
  }
}

TEST(Checker, MutantsAreDetected) {
  Trace base = run(3, 11);
  auto mutants = mutate::generate(base, 10, 5);
  ASSERT_GE(mutants.size(), 25u);
  for (const auto& m : mutants) EXPECT_TRUE(mutate::detected(m.trace)) << m.description;
}

TEST(Checker, SwapNamesTotalOrder) {
  Trace base = run(3, 12);
  auto sites = mutate::swap_sites(base);
  ASSERT_FALSE(sites.empty());
  for (const auto& [a, b] : sites) {
    if (base.events[a].type != EventType::Apply) continue;
    auto v = check_po_abcast(mutate::swap(base, a, b).trace);
    EXPECT_FALSE(v.get("total_order").pass);
    EXPECT_FALSE(v.get("total_order").detail.empty());
    break;
  }
}

TEST(Checker, ExecuteBeforeApplyIsCaught) {
  bool halted = false;
  Trace t = run_allowing_halt(config(3, 21, 200, Fault::ExecuteBeforeApply), halted);
  if (halted) GTEST_SKIP() << "fault halted the run before a trace was produced";
  CheckReport r = check_trace(t);
  EXPECT_FALSE(r.po.get("primary_integrity").pass);
  EXPECT_FALSE(r.pass());
}

TEST(Checker, ReverseApplyIsCaught) {
  bool halted = false;
  Trace t = run_allowing_halt(config(3, 22, 200, Fault::ReverseApply), halted);
  if (halted) SUCCEED() << "replica refused to apply out of order";
  else EXPECT_FALSE(check_trace(t).pass());
}

TEST(Checker, EmptyTracePasses) {
  Trace t = run(2, 1, 1);
  t.events.clear();
  CheckReport r = check_trace(t);
  EXPECT_TRUE(r.pass()) << r.to_json();
  auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["format"], "opart-verdict/1");
  EXPECT_EQ(j["pass"], true);
}

TEST(Checker, SingleServerOrderIsCommitOrder) {
  Trace t = run(1, 4, 40);
  auto order = build_total_order(t);
  std::vector<std::uint64_t> commits;
  for (const auto& e : t.events) {
    if (e.type == EventType::Commit) commits.push_back(e.op);
  }
  std::vector<std::uint64_t> got;
  for (const auto& o : order) got.push_back(o.op);
  EXPECT_EQ(got, commits);
  EXPECT_TRUE(replay_and_compare(t, order).pass);
}

TEST(Checker, LocalsSitBetweenTheirGlobalFences) {
  Trace t = run(2, 6, 60);
  auto order = build_total_order(t);
  // Gap counts of globals rise by one each; a non-global's gap equals the
  // number of globals placed before it.
  std::size_t globals = 0;
  for (const auto& o : order) {
    if (o.op_class == OpClass::Global) {
      EXPECT_EQ(o.gap, globals);
      ++globals;
    } else {
      EXPECT_EQ(o.gap, globals);
    }
  }
  EXPECT_GT(globals, 0u);
}

TEST(Checker, BruteForceOnTinyRuns) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Trace t = run(2, seed, 6);
    bool replay = replay_and_compare(t, build_total_order(t)).pass;
    bool brute = brute_force_serializability(t).pass;
    EXPECT_EQ(replay, brute) << "seed " << seed;
    EXPECT_TRUE(brute) << "seed " << seed;
  }
  Trace one = run(2, 3, 1);
  EXPECT_TRUE(brute_force_serializability(one).pass);
}

TEST(Checker, FabricatedReplyFails) {
  Trace t = run(2, 8, 6);
  for (auto& e : t.events) {
    if (e.type == EventType::Reply && !e.error && e.reply.rfind("[", 0) == 0) {
      e.reply = "[(424242)]";
      break;
    }
  }
  EXPECT_FALSE(brute_force_serializability(t).pass);
  CheckReport r = check_trace(t);
  EXPECT_FALSE(r.serializability.pass);
  EXPECT_TRUE(r.serializability.op.has_value());
}

TEST(Checker, BruteForceRefusesLargeInstances) {
  Trace t = run(2, 1, 30);
  EXPECT_THROW((void)brute_force_serializability(t, 8), InstanceTooLarge);
}

TEST(Checker, MalformedTraceIsRejected) {
  EXPECT_THROW((void)Trace::from_jsonl("not json\n"), TraceFormatError);
  EXPECT_THROW((void)Trace::from_jsonl(""), TraceFormatError);
  Trace t = run(2, 1, 5);
  std::string text = t.to_jsonl();
  text += "{\"seq\": 999, \"type\": \"teleport\"}\n";
  EXPECT_THROW((void)Trace::from_jsonl(text), TraceFormatError);
  Trace bad = t;
  for (auto& e : bad.events) {
    if (e.type == EventType::Final) {
      e.digest = "0000";
      break;
    }
  }
  EXPECT_THROW((void)check_trace(bad), TraceFormatError);
}

TEST(Checker, DeliveryOrdersAgreeOnCommonUpdates) {
  Trace t = run(3, 30);
  EXPECT_TRUE(check_common_prefix(t).pass);
  EXPECT_TRUE(check_exactly_once(t).pass);
  auto orders = delivery_orders(t);
  ASSERT_EQ(orders.size(), 3u);
  EXPECT_EQ(orders[0].size(), orders[1].size());
}
