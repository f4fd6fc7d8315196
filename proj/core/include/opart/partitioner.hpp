#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opart/condition.hpp"
#include "opart/minisql.hpp"

namespace opart {

/// Direction of a conflict between `first` (params tagged 0) and `second`
/// (params tagged 1).
enum class ConflictKind {
  WriteWrite,
  FirstReadsSecond,  // first reads what second writes
  SecondReadsFirst,  // second reads what first writes
};

std::string to_string(ConflictKind k);

struct ConflictRecord {
  std::string first;
  std::string second;
  ConflictKind kind = ConflictKind::WriteWrite;
  ConditionDNF condition;

  [[nodiscard]] bool involves(const std::string& t) const { return first == t || second == t; }
  /// Name of the writer whose effects are read, or empty for write-write.
  [[nodiscard]] const std::string* writer() const;
  [[nodiscard]] const std::string* reader() const;
};

struct DetectOptions {
  /// Skip write-write pairs whose shared attributes no transaction ever reads.
  /// Such writes cannot influence any reply.
  bool skip_unobservable_writes = true;
};

/// Visits every unordered pair (t, t') with t' at or after t in input order,
/// including t = t'. Self pairs carry a single reads-from record.
std::vector<ConflictRecord> detect_conflicts(std::span<const TransactionTemplate> templates,
                                             const DetectOptions& options = {});

struct PartitioningArray {
  std::map<std::string, std::vector<std::string>> assignment;

  [[nodiscard]] const std::vector<std::string>& of(const std::string& txn) const;
  bool operator==(const PartitioningArray&) const = default;
};

/// Whether `record` still holds once both sides are routed by their
/// partitioning parameters.
bool survives(const ConflictRecord& record, const std::vector<std::string>& first_params,
              const std::vector<std::string>& second_params);

std::vector<ConflictRecord> residual_conflicts(const PartitioningArray& p,
                                               std::span<const ConflictRecord> conflicts);

double weight_of(std::span<const TransactionTemplate> templates, const std::string& name);

/// Sum of weight(t) + weight(t') over records that survive clause removal.
double cost(const PartitioningArray& p, std::span<const ConflictRecord> conflicts,
            std::span<const TransactionTemplate> templates);

class SearchCapExceeded : public std::runtime_error {
 public:
  explicit SearchCapExceeded(std::uint64_t space)
      : std::runtime_error("partitioning search space of " + std::to_string(space) +
                           " candidates exceeds the cap; prune parameters or raise the cap"),
        space_(space) {}
  [[nodiscard]] std::uint64_t space() const { return space_; }

 private:
  std::uint64_t space_;
};

struct OptimizeOptions {
  std::uint64_t max_candidates = 10'000'000;
  /// 1 = single partitioning parameter per transaction; 2+ also tries
  /// multi-parameter (dual-key) assignments.
  std::size_t max_params_per_txn = 1;
};

/// Exhaustive minimisation of cost(). Options of a transaction that can never
/// remove a clause are cost- and class-equivalent to "no parameter" and are
/// dropped before enumeration. Ties: fewer Global transactions, then the
/// lexicographically smallest array (by transaction name, empty list first).
PartitioningArray optimize_partitioning(std::span<const TransactionTemplate> templates,
                                        std::span<const ConflictRecord> conflicts,
                                        const OptimizeOptions& options = {});

/// Search-space size before option pruning (product of option counts).
std::uint64_t raw_search_space(std::span<const TransactionTemplate> templates, const OptimizeOptions& options);

enum class OpClass { Commutative, Local, Global, LocalOrGlobal };

std::string to_string(OpClass c);
OpClass op_class_from_string(const std::string& s);

struct TxnClassification {
  std::string name;
  OpClass op_class = OpClass::Commutative;
  std::vector<std::string> parameters;
  bool read_only = false;
  double weight = 1.0;
};

struct ClassCounts {
  int local = 0;
  int global = 0;
  int commutative = 0;
  int local_or_global = 0;
  int read_only = 0;
  int total = 0;
};

struct ClassificationReport {
  std::vector<TxnClassification> transactions;  // input order
  std::vector<ConflictRecord> residual;
  double total_cost = 0.0;

  [[nodiscard]] const TxnClassification* find(const std::string& name) const;
  [[nodiscard]] ClassCounts counts() const;
};

ClassificationReport classify(std::span<const TransactionTemplate> templates, const PartitioningArray& p,
                              std::span<const ConflictRecord> conflicts);

struct PartitionOptions {
  DetectOptions detect;
  OptimizeOptions optimize;
  std::map<std::string, double> weights;  // overrides per transaction
};

struct PartitionResult {
  std::vector<TransactionTemplate> templates;  // with derived access sets and weights
  std::vector<ConflictRecord> conflicts;
  PartitioningArray partitioning;
  ClassificationReport report;
};

/// derive_access_sets + detect_conflicts + optimize_partitioning + classify.
PartitionResult run_partitioning(std::vector<TransactionTemplate> templates, const Schema& schema,
                                 const PartitionOptions& options = {});

std::string report_to_json(const ClassificationReport& report, const PartitioningArray& p);
/// Human-readable summary with the L / G / C / L/G / Read-only / Total columns.
std::string report_to_table(const ClassificationReport& report, const std::string& application);

/// Parses a weights file: JSON object {"format": "opart-weights/1", "weights": {txn: number}}.
std::map<std::string, double> parse_weights(const std::string& json_text);

}  // namespace opart
