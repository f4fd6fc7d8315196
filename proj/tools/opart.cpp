// opart: partition templates, simulate a deployment, check a trace.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "opart/checker.hpp"
#include "opart/partitioner.hpp"
#include "opart/sim.hpp"

namespace fs = std::filesystem;
using namespace opart;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
}

struct PartitionArgs {
  std::string schema;
  std::string templates;
  std::string weights;
  std::string out;
  std::size_t max_params = 1;
};

int cmd_partition(const PartitionArgs& a) {
  Schema schema = parse_schema(read_file(a.schema));
  std::string text = read_file(a.templates);
  std::vector<TransactionTemplate> templates;
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) templates = parse_template_file(text);
  PartitionOptions opts;
  if (!a.weights.empty()) opts.weights = parse_weights(read_file(a.weights));
  opts.optimize.max_params_per_txn = a.max_params;
  PartitionResult r = run_partitioning(std::move(templates), schema, opts);

  std::string name = fs::absolute(a.templates).parent_path().filename().string();
  std::string table = report_to_table(r.report, name);
  std::cout << table;
  if (!a.out.empty()) {
    write_file(fs::path(a.out) / "partition.json", report_to_json(r.report, r.partitioning));
    write_file(fs::path(a.out) / "partition.txt", table);
  }
  return kOk;
}

struct SimulateArgs {
  std::string workload;
  std::string latency;
  std::string out;
  std::string scenario;
  std::optional<int> servers;
  std::optional<std::uint64_t> seed;
  std::optional<double> misdirect;
  std::vector<double> sweep;
  double latency_cap_ms = 2000.0;
  int max_clients = 256;
  bool check = false;
};

SimConfig load_config(const SimulateArgs& a) {
  SimConfig cfg;
  std::string base = fs::path(a.workload).parent_path().string();
  cfg.spec = WorkloadSpec::from_json(read_file(a.workload), base.empty() ? "." : base);
  if (a.seed) cfg.spec.seed = *a.seed;
  if (a.misdirect) cfg.spec.misdirect_prob = *a.misdirect;
  if (!a.latency.empty()) cfg.latency = LatencyMatrix::from_json(read_file(a.latency));
  cfg.servers = a.servers.value_or(cfg.latency.size());
  cfg.scenario = a.scenario.empty() ? cfg.spec.name : a.scenario;
  cfg.spec.validate();
  return cfg;
}

void print_summary(const MetricsReport& m) {
  std::printf("%s: servers=%d clients=%d issued=%llu replies=%llu maps=%llu errors=%llu\n", m.scenario.c_str(),
              m.servers, m.clients, static_cast<unsigned long long>(m.issued),
              static_cast<unsigned long long>(m.replies), static_cast<unsigned long long>(m.maps),
              static_cast<unsigned long long>(m.errors));
  for (const auto& c : m.classes) {
    std::printf("  %-12s n=%-7llu %10.1f ops/s  mean %8.2f ms  p50 %8.2f ms  p99 %8.2f ms\n", c.op_class.c_str(),
                static_cast<unsigned long long>(c.count), c.throughput, c.mean_ms, c.p50_ms, c.p99_ms);
  }
}

int run_check(const Trace& trace, const fs::path& verdict_path) {
  CheckReport r = check_trace(trace);
  if (!verdict_path.empty()) write_file(verdict_path, r.to_json());
  for (const auto& p : r.po.properties) std::printf("  %-22s %s %s\n", p.name.c_str(), p.pass ? "PASS" : "FAIL", p.detail.c_str());
  for (const auto* p : {&r.common_prefix, &r.exactly_once}) {
    std::printf("  %-22s %s %s\n", p->name.c_str(), p->pass ? "PASS" : "FAIL", p->detail.c_str());
  }
  std::printf("  %-22s %s %s\n", "serializability", r.serializability.pass ? "PASS" : "FAIL",
              r.serializability.detail.c_str());
  return r.pass() ? kOk : kViolation;
}

int cmd_simulate(const SimulateArgs& a) {
  SimConfig cfg = load_config(a);
  fs::path out = a.out.empty() ? fs::path(".") : fs::path(a.out);

  if (!a.sweep.empty()) {
    if (cfg.spec.local_group.empty() || cfg.spec.global_group.empty()) {
      throw UsageError("--sweep-local-ratio needs a workload with groups.local and groups.global");
    }
    std::ostringstream csv;
    csv << MetricsReport::csv_header();
    for (double ratio : a.sweep) {
      if (ratio > 1.0) ratio /= 100.0;
      SimConfig point = cfg;
      point.spec.local_ratio = ratio;
      point.spec.validate();
      point.partition = partition_workload(point.spec);
      SaturationResult s = find_saturation(point, a.latency_cap_ms, a.max_clients);
      char row[256];
      std::snprintf(row, sizeof row, "%s-local%.0f,%d,%d,all,%.3f,%.3f,,\n", cfg.scenario.c_str(), ratio * 100.0,
                    point.servers, s.clients_per_site * std::min(point.servers, point.latency.size()), s.throughput,
                    s.mean_ms);
      csv << row;
      std::printf("local ratio %3.0f%%: saturation %.1f ops/s at %d clients/site (mean %.1f ms)\n", ratio * 100.0,
                  s.throughput, s.clients_per_site, s.mean_ms);
    }
    write_file(out / "sweep.csv", csv.str());
    return kOk;
  }

  SimResult r = simulate(cfg);
  write_file(out / "trace.jsonl", r.trace.to_jsonl());
  write_file(out / "metrics.csv", MetricsReport::csv_header() + r.metrics.csv_rows());
  write_file(out / "metrics.json", r.metrics.to_json());
  print_summary(r.metrics);
  if (a.check) return run_check(r.trace, out / "verdict.json");
  return kOk;
}

int cmd_check(const std::string& trace_path, const std::string& out) {
  Trace trace = Trace::from_jsonl(read_file(trace_path));
  return run_check(trace, out.empty() ? fs::path() : fs::path(out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operation partitioning: classify transactions, simulate the token protocol, check traces"};
  app.require_subcommand(1);

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Classify transaction templates");
  part->add_option("--schema", pa.schema, "Schema file")->required();
  part->add_option("--templates", pa.templates, "Template file")->required();
  part->add_option("--weights", pa.weights, "Weights file (opart-weights/1)");
  part->add_option("--out", pa.out, "Output directory for partition.json and partition.txt");
  part->add_option("--max-params", pa.max_params, "Partitioning parameters per transaction")->check(CLI::Range(1, 4));

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run the deterministic simulation");
  sim->add_option("--workload", sa.workload, "Workload file (opart-workload/1)")->required();
  sim->add_option("--latency", sa.latency, "Latency file (opart-latency/1)");
  sim->add_option("--servers", sa.servers, "Number of servers (default: one per site)")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sa.seed, "RNG seed (overrides the workload)");
  sim->add_option("--out", sa.out, "Output directory");
  sim->add_option("--scenario", sa.scenario, "Scenario label for metrics");
  sim->add_option("--misdirect-prob", sa.misdirect, "Probability a client contacts the wrong server")
      ->check(CLI::Range(0.0, 1.0));
  sim->add_option("--sweep-local-ratio", sa.sweep, "Local ratios (fraction or percent) for a saturation sweep")
      ->delimiter(',');
  sim->add_option("--latency-cap", sa.latency_cap_ms, "Mean latency cap for saturation, ms");
  sim->add_option("--max-clients", sa.max_clients, "Upper bound on clients per site for saturation");
  sim->add_flag("--check", sa.check, "Check the produced trace");

  std::string trace_path;
  std::string verdict_out;
  auto* chk = app.add_subcommand("check", "Check a recorded trace");
  chk->add_option("trace", trace_path, "Trace file (JSON lines)")->required();
  chk->add_option("--out", verdict_out, "Write the verdict document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*part) return cmd_partition(pa);
    if (*sim) return cmd_simulate(sa);
    return cmd_check(trace_path, verdict_out);
  } catch (const SimulationHalted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
