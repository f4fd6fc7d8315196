#pragma once

// Deterministic discrete-event simulation of N Conveyor Belt servers, their
// clients and a WAN latency matrix.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "opart/partitioner.hpp"
#include "opart/protocol.hpp"
#include "opart/trace.hpp"

namespace opart {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded generator with platform-independent bounded draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  /// Uniform in [0, 1) with 53 bits of precision.
  double unit();

 private:
  std::mt19937_64 gen_;
};

/// Site-to-site one-way delays. File format "opart-latency/1":
///   {"format": "opart-latency/1", "kind": "rtt" | "one_way", "sites": [...],
///    "intra_site_ms": x, "matrix_ms": [[...], ...], "jitter_ms": 0}
/// With kind "rtt" (ping times) every entry, including intra_site_ms, is halved.
/// Diagonal entries of matrix_ms are ignored in favour of intra_site_ms.
struct LatencyMatrix {
  std::vector<std::string> sites;
  std::vector<std::vector<double>> one_way_ms;  // diagonal holds the intra-site delay
  double jitter_ms = 0.0;

  static LatencyMatrix from_json(const std::string& text);
  /// One site with the given round-trip time.
  static LatencyMatrix single_site(double intra_rtt_ms);
  /// Symmetric, nonnegative, intra-site no larger than any inter-site entry.
  void validate() const;
  [[nodiscard]] double one_way(int site_a, int site_b) const { return one_way_ms.at(site_a).at(site_b); }
  [[nodiscard]] double intra_site_one_way(int site) const { return one_way_ms.at(site).at(site); }
  [[nodiscard]] int size() const { return static_cast<int>(sites.size()); }
};

struct ParamSpec {
  enum Kind {
    HomeKey,  // integer in [lo, hi] owned by the client's nearest server
    Uniform,  // integer in [lo, hi]
    Choice,   // one of `choices`
  } kind = Uniform;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<Value> choices;
};

/// Rows generated into a table before the run; "$i" in a string value is
/// replaced by the row index, and a value of exactly "$i" becomes the integer.
struct PopulateSpec {
  std::string table;
  std::int64_t rows = 0;
  std::map<std::string, Value> columns;
};

enum class Fault {
  None,
  ExecuteBeforeApply,  // the token holder runs its batch before applying foreign updates
  ReverseApply,        // foreign updates applied in reverse token order
};

std::string to_string(Fault f);
Fault fault_from_string(const std::string& s);

/// Workload file format "opart-workload/1"; see the README for the field list.
struct WorkloadSpec {
  std::string name;
  std::string schema_text;
  std::string templates_text;
  std::vector<PopulateSpec> populate;
  std::map<std::string, double> mix;
  std::map<std::string, std::map<std::string, ParamSpec>> params;
  std::map<std::string, double> weights;

  // Synthetic mode: the mix is split local_ratio / (1 - local_ratio) evenly
  // over the two groups.
  std::optional<double> local_ratio;
  std::vector<std::string> local_group;
  std::vector<std::string> global_group;

  int clients_per_site = 1;
  bool clients_at_all_sites = false;
  double service_time_ms = 5.0;
  double apply_time_ms = 0.5;
  double token_min_hold_ms = 1.0;
  double think_time_ms = 0.0;
  int cores = 2;
  double duration_ms = 10'000.0;
  double warmup_ms = 0.0;
  std::uint64_t max_ops = 0;  // 0: bounded by duration only
  double misdirect_prob = 0.0;
  int max_retries = 3;
  std::size_t max_params_per_txn = 1;
  std::uint64_t seed = 1;
  Fault fault = Fault::None;
  bool record_trace = true;

  /// `base_dir` resolves the "schema" and "templates" file paths.
  static WorkloadSpec from_json(const std::string& text, const std::string& base_dir);
  /// Mix after applying local_ratio, normalised check included.
  [[nodiscard]] std::map<std::string, double> effective_mix() const;
  void validate() const;
};

struct ClassMetrics {
  std::string op_class;  // "all", "local", "global", "commutative"
  std::uint64_t count = 0;
  double throughput = 0.0;  // ops per simulated second
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
};

struct ServerTokenStats {
  int server = 0;
  std::uint64_t epochs = 0;
  double mean_hold_ms = 0.0;
  double max_gap_ms = 0.0;  // longest interval between two token receptions
};

struct QueueSample {
  std::int64_t t_us = 0;
  int server = 0;
  std::size_t depth = 0;
};

struct MetricsReport {
  std::string scenario;
  int servers = 0;
  int clients = 0;
  std::vector<ClassMetrics> classes;
  std::uint64_t issued = 0;
  std::uint64_t replies = 0;
  std::uint64_t maps = 0;
  std::uint64_t errors = 0;
  std::uint64_t in_flight = 0;
  std::int64_t end_us = 0;
  std::vector<ServerTokenStats> token;
  std::vector<QueueSample> queue_depth;

  [[nodiscard]] const ClassMetrics* find(const std::string& op_class) const;
  static std::string csv_header();
  /// One row per class, in the column order of csv_header().
  [[nodiscard]] std::string csv_rows() const;
  [[nodiscard]] std::string to_json() const;
};

struct SimConfig {
  WorkloadSpec spec;
  LatencyMatrix latency = LatencyMatrix::single_site(20.0);
  int servers = 1;
  std::string scenario;
  /// Precomputed classification; derived from the spec when absent.
  std::optional<PartitionResult> partition;
};

struct SimResult {
  Trace trace;
  MetricsReport metrics;
};

/// Raised when a replica cannot apply a state update (a protocol ordering bug).
class SimulationHalted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds the initial database of a workload.
Database initial_database(const WorkloadSpec& spec);
PartitionResult partition_workload(const WorkloadSpec& spec);

SimResult simulate(const SimConfig& config);

struct SaturationResult {
  double throughput = 0.0;
  int clients_per_site = 0;
  double mean_ms = 0.0;
};

/// Binary search over clients per site for the highest throughput whose mean
/// latency stays under `latency_cap_ms`.
SaturationResult find_saturation(const SimConfig& base, double latency_cap_ms, int max_clients_per_site = 256);

}  // namespace opart
