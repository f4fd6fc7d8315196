#pragma once

// Conveyor Belt building blocks: operation routing, the pending-global queue
// Q, the circulating token and step-wise execution of operations on a store.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "opart/minisql.hpp"
#include "opart/partitioner.hpp"
#include "opart/store.hpp"

namespace opart {

using Args = std::map<std::string, Value>;

struct Operation {
  std::uint64_t id = 0;
  std::string txn;
  Args args;
};

/// Server responsible for a partitioning-parameter value.
int partition_of(const Value& v, int n);
/// Home server of a Global transaction without partitioning parameters.
int home_of_unpartitioned(const std::string& txn, int n);

struct RouteDecision {
  OpClass op_class = OpClass::Commutative;  // never LocalOrGlobal
  std::optional<int> server;                // empty: whichever server was contacted
};

class Router {
 public:
  Router(const std::vector<TxnClassification>& classes, int n);

  /// Throws std::invalid_argument for unknown transactions or missing arguments.
  [[nodiscard]] RouteDecision route(const std::string& txn, const Args& args) const;
  [[nodiscard]] int servers() const { return n_; }
  [[nodiscard]] const TxnClassification& classification(const std::string& txn) const;

 private:
  std::map<std::string, TxnClassification> classes_;
  int n_;
};

/// What a server does with an incoming request (Algorithm 2, request handler).
struct RequestAction {
  enum Kind { ExecuteNow, Enqueue, Redirect } kind = ExecuteNow;
  OpClass op_class = OpClass::Commutative;
  int target = -1;  // responsible server for Redirect
};

RequestAction decide_request(const Router& router, int self, const std::string& txn, const Args& args);

struct TokenEntry {
  std::uint64_t op_id = 0;
  int origin = 0;
  StateUpdate update;
};

struct Token {
  std::vector<TokenEntry> entries;
  std::uint64_t epoch = 0;
};

/// Phase 1 of token handling: strips this server's own entries (they have
/// completed a circulation) and returns, in token order, the entries to apply.
struct TokenIntake {
  std::vector<TokenEntry> to_apply;
  std::vector<std::uint64_t> purged;
};
TokenIntake take_in(Token& token, int self);

/// The pending-global queue Q: concurrent appends, atomic snapshot-and-clear.
class PendingQueue {
 public:
  void push(Operation op, int client);
  struct Item {
    Operation op;
    int client = -1;
  };
  std::vector<Item> atomic_snapshot();
  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<Item> items_;
};

/// Binds every statement of a template to concrete arguments.
std::vector<Statement> bind_operation(const TransactionTemplate& t, const Args& args);

/// Runs one operation or state update statement by statement inside a single
/// engine transaction. Duplicate-key INSERTs inside an operation are ignored;
/// in apply mode any statement failure raises ApplyError.
class OpRunner {
 public:
  enum class Step { Ok, Blocked, Deadlock };

  OpRunner(Engine& engine, std::vector<Statement> statements, bool apply_mode = false);
  OpRunner(OpRunner&&) = default;

  Step step();
  [[nodiscard]] bool finished() const { return next_ == statements_.size(); }
  /// Begins a fresh transaction after a deadlock abort.
  void restart();
  CommitInfo commit(UpdateQueue* sink = nullptr, std::optional<std::uint64_t> op_id = std::nullopt);
  void abort();

  [[nodiscard]] const std::string& reply() const { return reply_; }
  [[nodiscard]] std::size_t statement_count() const { return statements_.size(); }
  [[nodiscard]] TxnId txn() const { return txn_; }

 private:
  Engine* engine_;
  std::vector<Statement> statements_;
  bool apply_mode_;
  TxnId txn_;
  std::size_t next_ = 0;
  std::string reply_;
};

struct Outcome {
  std::string reply;
  CommitInfo commit;
};

/// Blocking execution with deadlock retry; used for sequential replay.
Outcome execute(Engine& engine, const std::vector<Statement>& statements, UpdateQueue* sink = nullptr,
                std::optional<std::uint64_t> op_id = std::nullopt);

/// Reply fragment for one statement result: SELECT rows as "[(v, v), ...]",
/// mutations as "#<affected>".
std::string reply_fragment(const Statement& s, const ExecResult& r);

}  // namespace opart
