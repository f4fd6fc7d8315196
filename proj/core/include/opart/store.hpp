#pragma once

// In-memory table store with strict two-phase locking, state-update
// extraction and commit-order tracing into an update queue.

#include <compare>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "opart/minisql.hpp"
#include "opart/value.hpp"

namespace opart {

using Key = std::vector<Value>;

struct RowKey {
  std::string table;
  Key key;
  auto operator<=>(const RowKey&) const = default;
};

std::string to_string(const RowKey& k);

class Table {
 public:
  explicit Table(TableDef def);

  [[nodiscard]] const TableDef& def() const { return def_; }
  [[nodiscard]] const std::map<Key, Row>& rows() const { return rows_; }
  [[nodiscard]] Key key_of(const Row& row) const;
  [[nodiscard]] const Row* find(const Key& key) const;

  /// Returns false (and changes nothing) when the key already exists.
  bool insert(Row row);
  void put(Row row);
  void erase(const Key& key);

 private:
  TableDef def_;
  std::vector<int> key_idx_;
  std::map<Key, Row> rows_;
};

class Database {
 public:
  explicit Database(Schema schema);

  [[nodiscard]] const Schema& schema() const { return schema_; }
  Table& table(std::string_view name);
  [[nodiscard]] const Table& table(std::string_view name) const;
  [[nodiscard]] const std::map<std::string, Table>& tables() const { return tables_; }

  /// Canonical text: tables by name, rows by primary key.
  [[nodiscard]] std::string dump() const;
  /// Hex FNV-1a of dump().
  [[nodiscard]] std::string digest() const;
  static Database load(Schema schema, std::string_view dump);

  bool operator==(const Database& other) const { return dump() == other.dump(); }

 private:
  Schema schema_;
  std::map<std::string, Table> tables_;
};

std::string digest_of(std::string_view dump);

/// Concrete mutating statements of one committed transaction, in execution order.
struct StateUpdate {
  std::vector<Statement> statements;

  [[nodiscard]] bool empty() const { return statements.empty(); }
  [[nodiscard]] std::vector<std::string> to_sql() const;
  static StateUpdate from_sql(const std::vector<std::string>& sql);
};

/// The shared queue U. Appends from concurrent committers are atomic.
class UpdateQueue {
 public:
  struct Entry {
    std::uint64_t op_id = 0;
    StateUpdate update;
  };

  explicit UpdateQueue(bool keep_empty = false) : keep_empty_(keep_empty) {}

  void append(std::uint64_t op_id, StateUpdate u);
  [[nodiscard]] std::vector<Entry> snapshot() const;
  std::vector<Entry> drain();
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool keeps_empty() const { return keep_empty_; }

 private:
  bool keep_empty_;
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

enum class LockMode { IS, IX, S, SIX, X };

std::string to_string(LockMode m);
bool compatible(LockMode held, LockMode requested);
/// Least mode covering both.
LockMode combine(LockMode a, LockMode b);

using TxnId = std::uint64_t;

/// Whole-table resource when `key` is empty.
struct LockResource {
  std::string table;
  std::optional<Key> key;
  auto operator<=>(const LockResource&) const = default;
};

/// Lock table without internal synchronization; the engine serializes access.
/// A refused request stays registered as waiting until the transaction is
/// granted something or releases; later requests from younger transactions
/// queue behind it, so upgraders are not starved by a stream of readers.
class LockManager {
 public:
  /// Grants (or upgrades) the lock, or fills `blockers` with the holders and
  /// older waiters in the way and returns false.
  bool try_acquire(TxnId txn, const LockResource& res, LockMode mode, std::vector<TxnId>& blockers);
  void release_all(TxnId txn);
  [[nodiscard]] std::optional<LockMode> held(TxnId txn, const LockResource& res) const;
  [[nodiscard]] std::size_t lock_count(TxnId txn) const;

 private:
  void stop_waiting(TxnId txn);

  std::map<LockResource, std::map<TxnId, LockMode>> table_;
  std::map<TxnId, std::set<LockResource>> by_txn_;
  std::map<LockResource, std::map<TxnId, LockMode>> waiting_;
  std::map<TxnId, LockResource> waiting_on_;
};

enum class ExecStatus {
  Ok,
  WouldBlock,           // lock conflict; retry later (non-blocking API only)
  Deadlock,             // transaction was chosen as victim and has been aborted; retriable
  ConstraintViolation,  // statement failed; transaction still active
};

std::string to_string(ExecStatus s);

struct ExecResult {
  ExecStatus status = ExecStatus::Ok;
  std::vector<Row> rows;  // SELECT output, primary-key order
  std::size_t affected = 0;
  std::string message;
};

struct CommitInfo {
  StateUpdate update;
  std::uint64_t commit_seq = 0;
  std::vector<RowKey> written;  // distinct keys in first-write order
};

enum class TxnStatus { Active, Committed, Aborted };

/// Raised when replaying a state update fails; indicates an ordering bug upstream.
class ApplyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  explicit Engine(Database db);

  TxnId begin();

  /// Non-blocking: returns WouldBlock on lock conflicts. Used by the
  /// deterministic simulator, which parks and retries.
  ExecResult try_exec_stmt(TxnId txn, const Statement& bound);
  /// Blocking: waits on lock conflicts. Safe to call from multiple threads
  /// for distinct transactions.
  ExecResult exec_stmt(TxnId txn, const Statement& bound);

  /// Appends the recorded update to `sink` while every lock is still held,
  /// then releases. Empty updates reach the sink only if it keeps empties.
  CommitInfo commit(TxnId txn, UpdateQueue* sink = nullptr, std::optional<std::uint64_t> op_id = std::nullopt);
  void abort(TxnId txn);

  /// Replays `u` inside one internal transaction (blocking). Throws ApplyError.
  CommitInfo apply(const StateUpdate& u);

  [[nodiscard]] TxnStatus status(TxnId txn) const;
  [[nodiscard]] bool doomed(TxnId txn) const;
  /// Increments whenever locks are released or a victim is chosen.
  [[nodiscard]] std::uint64_t wake_epoch() const;
  [[nodiscard]] std::size_t active_transactions() const;
  [[nodiscard]] std::uint64_t commits() const;

  [[nodiscard]] Database snapshot() const;
  [[nodiscard]] std::string dump() const;
  [[nodiscard]] std::string digest() const;

 private:
  struct Undo {
    std::string table;
    Key key;
    std::optional<Row> before;
  };
  struct TxnState {
    TxnStatus status = TxnStatus::Active;
    std::vector<Undo> undo;
    StateUpdate update;
    std::vector<RowKey> written;
    bool doomed = false;
  };

  ExecResult try_exec_locked(TxnId txn, const Statement& bound);
  ExecResult evaluate(TxnState& st, const Statement& bound);
  void abort_locked(TxnId txn);
  TxnState& active(TxnId txn);
  void note_written(TxnState& st, const std::string& table, const Key& key);
  bool find_cycle(TxnId start, std::vector<TxnId>& cycle) const;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  Database db_;
  LockManager locks_;
  std::map<TxnId, TxnState> txns_;
  std::map<TxnId, std::vector<TxnId>> waits_for_;
  TxnId next_txn_ = 1;
  std::uint64_t commit_seq_ = 0;
  std::uint64_t wake_epoch_ = 0;
};

/// Evaluates a bound predicate list against a row of `table`.
bool matches(const TableDef& table, const Row& row, const std::vector<Predicate>& where);
bool like_match(std::string_view text, std::string_view pattern);

}  // namespace opart
