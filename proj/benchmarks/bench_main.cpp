#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "opart/checker.hpp"
#include "opart/sim.hpp"

using namespace opart;

namespace {

std::string path(const std::string& rel) { return std::string(OPART_BENCH_DATA_DIR) + "/" + rel; }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

WorkloadSpec workload(const std::string& rel) {
  std::string p = path(rel);
  return WorkloadSpec::from_json(slurp(p), std::filesystem::path(p).parent_path().string());
}

void BM_PartitionTpcw(benchmark::State& state) {
  auto templates = parse_template_file(slurp(path("workloads/tpcw/templates.txn")));
  Schema schema = parse_schema(slurp(path("workloads/tpcw/schema.sql")));
  for (auto _ : state) benchmark::DoNotOptimize(run_partitioning(templates, schema));
}
BENCHMARK(BM_PartitionTpcw)->Unit(benchmark::kMillisecond);

void BM_EngineUpdate(benchmark::State& state) {
  Schema schema = parse_schema("-- opart-schema v1\nTABLE KV (K, V) KEY (K);\n");
  Database db(schema);
  for (std::int64_t k = 0; k < 1000; ++k) db.table("KV").put({k, std::int64_t{0}});
  Engine engine(db);
  std::vector<Statement> stmts;
  for (int k = 0; k < 1000; ++k) {
    stmts.push_back(parse_statement("UPDATE KV SET V = V + 1 WHERE K = " + std::to_string(k) + ";"));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    TxnId t = engine.begin();
    benchmark::DoNotOptimize(engine.try_exec_stmt(t, stmts[i++ % stmts.size()]));
    engine.commit(t);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EngineUpdate);

void BM_SimulateMiniStore(benchmark::State& state) {
  SimConfig c;
  c.spec = workload("workloads/ministore/workload.json");
  c.spec.duration_ms = 5000;
  c.latency = LatencyMatrix::from_json(slurp(path("config/latency_table3.json")));
  c.servers = static_cast<int>(state.range(0));
  c.partition = partition_workload(c.spec);
  std::uint64_t ops = 0;
  for (auto _ : state) ops += simulate(c).metrics.replies;
  state.SetItemsProcessed(static_cast<std::int64_t>(ops));
}
BENCHMARK(BM_SimulateMiniStore)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_CheckTrace(benchmark::State& state) {
  SimConfig c;
  c.spec = workload("workloads/ministore/workload_mixed.json");
  c.latency = LatencyMatrix::from_json(slurp(path("config/latency_wan3.json")));
  c.servers = 3;
  Trace t = simulate(c).trace;
  for (auto _ : state) benchmark::DoNotOptimize(check_trace(t).pass());
}
BENCHMARK(BM_CheckTrace)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
