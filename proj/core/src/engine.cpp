#include <algorithm>

#include "opart/store.hpp"

namespace opart {

std::string to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::WouldBlock: return "would-block";
    case ExecStatus::Deadlock: return "deadlock";
    case ExecStatus::ConstraintViolation: return "constraint-violation";
  }
  return "?";
}

namespace {

const Value& bound_value(const Operand& o) {
  const auto* v = std::get_if<Value>(&o);
  if (v == nullptr) throw std::invalid_argument("statement has unbound parameter '" + std::get<ParamRef>(o).name + "'");
  return *v;
}

/// The primary key when every key column is pinned by an equality.
std::optional<Key> pinned_key(const TableDef& def, const std::vector<Predicate>& where) {
  Key key;
  for (const auto& col : def.key) {
    auto it = std::find_if(where.begin(), where.end(),
                           [&](const Predicate& p) { return p.op == CmpOp::Eq && p.column == col; });
    if (it == where.end()) return std::nullopt;
    key.push_back(bound_value(it->value));
  }
  return key;
}

std::vector<Predicate> key_predicates(const TableDef& def, const Key& key) {
  std::vector<Predicate> out;
  for (std::size_t i = 0; i < def.key.size(); ++i) out.push_back(Predicate{def.key[i], CmpOp::Eq, key[i]});
  return out;
}

struct LockStep {
  LockResource res;
  LockMode mode;
};

std::vector<LockStep> lock_plan(const TableDef& def, const Statement& stmt) {
  std::vector<LockStep> plan;
  const std::string& t = def.name;
  std::visit(
      [&](const auto& q) {
        using S = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<S, InsertStmt>) {
          Key key;
          for (const auto& k : def.key) {
            auto it = std::find(q.columns.begin(), q.columns.end(), k);
            key.push_back(bound_value(q.values[it - q.columns.begin()]));
          }
          plan.push_back({{t, std::nullopt}, LockMode::IX});
          plan.push_back({{t, std::move(key)}, LockMode::X});
        } else {
          bool write = !std::is_same_v<S, SelectStmt>;
          if (auto key = pinned_key(def, q.where)) {
            plan.push_back({{t, std::nullopt}, write ? LockMode::IX : LockMode::IS});
            plan.push_back({{t, std::move(*key)}, write ? LockMode::X : LockMode::S});
          } else {
            plan.push_back({{t, std::nullopt}, write ? LockMode::X : LockMode::S});
          }
        }
      },
      stmt);
  return plan;
}

std::vector<Key> matching_keys(const Table& table, const std::vector<Predicate>& where) {
  std::vector<Key> out;
  if (auto key = pinned_key(table.def(), where)) {
    const Row* row = table.find(*key);
    if (row != nullptr && matches(table.def(), *row, where)) out.push_back(std::move(*key));
    return out;
  }
  for (const auto& [k, row] : table.rows()) {
    if (matches(table.def(), row, where)) out.push_back(k);
  }
  return out;
}

}  // namespace

Engine::Engine(Database db) : db_(std::move(db)) {}

TxnId Engine::begin() {
  std::lock_guard lock(mu_);
  TxnId id = next_txn_++;
  txns_.emplace(id, TxnState{});
  return id;
}

Engine::TxnState& Engine::active(TxnId txn) {
  auto it = txns_.find(txn);
  if (it == txns_.end()) throw std::logic_error("unknown transaction " + std::to_string(txn));
  if (it->second.status != TxnStatus::Active) throw std::logic_error("transaction " + std::to_string(txn) + " is not active");
  return it->second;
}

bool Engine::find_cycle(TxnId start, std::vector<TxnId>& cycle) const {
  // Depth-first search for a path from start's blockers back to start.
  std::vector<std::pair<TxnId, std::size_t>> stack{{start, 0}};
  std::set<TxnId> visited{start};
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    auto it = waits_for_.find(node);
    if (it == waits_for_.end() || idx >= it->second.size()) {
      stack.pop_back();
      continue;
    }
    TxnId next = it->second[idx++];
    if (next == start) {
      cycle.clear();
      for (const auto& entry : stack) cycle.push_back(entry.first);
      return true;
    }
    if (visited.insert(next).second) stack.emplace_back(next, 0);
  }
  return false;
}

ExecResult Engine::try_exec_locked(TxnId txn, const Statement& bound) {
  auto it = txns_.find(txn);
  if (it == txns_.end()) throw std::logic_error("unknown transaction " + std::to_string(txn));
  if (it->second.doomed) return ExecResult{ExecStatus::Deadlock, {}, 0, "chosen as deadlock victim"};
  TxnState& st = active(txn);
  const TableDef& def = db_.table(table_of(bound)).def();

  for (const auto& step : lock_plan(def, bound)) {
    std::vector<TxnId> blockers;
    while (!locks_.try_acquire(txn, step.res, step.mode, blockers)) {
      waits_for_[txn] = blockers;
      std::vector<TxnId> cycle;
      if (!find_cycle(txn, cycle)) return ExecResult{ExecStatus::WouldBlock, {}, 0, "lock conflict"};
      TxnId victim = *std::max_element(cycle.begin(), cycle.end());
      abort_locked(victim);
      txns_.at(victim).doomed = true;
      if (victim == txn) return ExecResult{ExecStatus::Deadlock, {}, 0, "chosen as deadlock victim"};
    }
  }
  waits_for_.erase(txn);
  return evaluate(st, bound);
}

void Engine::note_written(TxnState& st, const std::string& table, const Key& key) {
  RowKey rk{table, key};
  if (std::find(st.written.begin(), st.written.end(), rk) == st.written.end()) st.written.push_back(std::move(rk));
}

ExecResult Engine::evaluate(TxnState& st, const Statement& bound) {
  ExecResult result;
  Table& table = db_.table(table_of(bound));
  const TableDef& def = table.def();

  auto violation = [&](std::string msg) {
    result.status = ExecStatus::ConstraintViolation;
    result.message = std::move(msg);
    return result;
  };

  if (const auto* q = std::get_if<SelectStmt>(&bound)) {
    std::vector<int> cols;
    for (const auto& c : q->columns) cols.push_back(def.column_index(c));
    for (const auto& key : matching_keys(table, q->where)) {
      const Row& row = *table.find(key);
      Row out;
      for (int c : cols) out.push_back(row[c]);
      result.rows.push_back(std::move(out));
    }
    return result;
  }

  if (const auto* q = std::get_if<InsertStmt>(&bound)) {
    Row row(def.columns.size(), Value{std::int64_t{0}});
    for (std::size_t i = 0; i < q->columns.size(); ++i) row[def.column_index(q->columns[i])] = bound_value(q->values[i]);
    Key key = table.key_of(row);
    if (table.find(key) != nullptr) return violation("duplicate primary key in " + def.name);
    st.undo.push_back(Undo{def.name, key, std::nullopt});
    InsertStmt rec{def.name, def.columns, {}};
    for (const auto& v : row) rec.values.emplace_back(v);
    table.insert(std::move(row));
    st.update.statements.emplace_back(std::move(rec));
    note_written(st, def.name, key);
    result.affected = 1;
    return result;
  }

  if (const auto* q = std::get_if<UpdateStmt>(&bound)) {
    std::vector<Key> keys = matching_keys(table, q->where);
    // Compute every new row first so a type error leaves the table untouched.
    std::vector<Row> new_rows;
    for (const auto& key : keys) {
      Row row = *table.find(key);
      const Row before = row;
      for (const auto& set : q->sets) {
        const Value& operand = bound_value(set.value);
        int idx = def.column_index(set.column);
        if (!set.base_column) {
          row[idx] = operand;
          continue;
        }
        const Value& base = before[def.column_index(*set.base_column)];
        if (!std::holds_alternative<std::int64_t>(base) || !std::holds_alternative<std::int64_t>(operand)) {
          return violation("arithmetic on non-integer value in " + def.name + "." + set.column);
        }
        std::int64_t a = std::get<std::int64_t>(base);
        std::int64_t b = std::get<std::int64_t>(operand);
        row[idx] = set.arith == '-' ? a - b : a + b;
      }
      new_rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      st.undo.push_back(Undo{def.name, keys[i], *table.find(keys[i])});
      // Recorded as an absolute, key-pinned write so replay is independent of
      // rows the replica does not share.
      UpdateStmt rec{def.name, {}, key_predicates(def, keys[i])};
      for (const auto& set : q->sets) {
        if (std::none_of(rec.sets.begin(), rec.sets.end(), [&](const SetClause& c) { return c.column == set.column; })) {
          rec.sets.push_back(SetClause{set.column, std::nullopt, 0, new_rows[i][def.column_index(set.column)]});
        }
      }
      table.put(std::move(new_rows[i]));
      st.update.statements.emplace_back(std::move(rec));
      note_written(st, def.name, keys[i]);
    }
    result.affected = keys.size();
    return result;
  }

  const auto& q = std::get<DeleteStmt>(bound);
  std::vector<Key> keys = matching_keys(table, q.where);
  for (const auto& key : keys) {
    st.undo.push_back(Undo{def.name, key, *table.find(key)});
    table.erase(key);
    st.update.statements.emplace_back(DeleteStmt{def.name, key_predicates(def, key)});
    note_written(st, def.name, key);
  }
  result.affected = keys.size();
  return result;
}

ExecResult Engine::try_exec_stmt(TxnId txn, const Statement& bound) {
  std::lock_guard lock(mu_);
  ExecResult r = try_exec_locked(txn, bound);
  if (r.status == ExecStatus::Deadlock) {
    ++wake_epoch_;
    cv_.notify_all();
  }
  return r;
}

ExecResult Engine::exec_stmt(TxnId txn, const Statement& bound) {
  std::unique_lock lock(mu_);
  while (true) {
    ExecResult r = try_exec_locked(txn, bound);
    if (r.status != ExecStatus::WouldBlock) {
      if (r.status == ExecStatus::Deadlock) {
        ++wake_epoch_;
        cv_.notify_all();
      }
      return r;
    }
    std::uint64_t seen = wake_epoch_;
    cv_.wait(lock, [&] { return wake_epoch_ != seen; });
  }
}

CommitInfo Engine::commit(TxnId txn, UpdateQueue* sink, std::optional<std::uint64_t> op_id) {
  std::lock_guard lock(mu_);
  TxnState& st = active(txn);
  CommitInfo info;
  info.commit_seq = ++commit_seq_;
  info.update = std::move(st.update);
  info.written = std::move(st.written);
  // Appended while every lock is still held, so conflicting commits reach
  // the queue in commit order.
  if (sink != nullptr) sink->append(op_id.value_or(info.commit_seq), info.update);
  st.status = TxnStatus::Committed;
  st.undo.clear();
  st.update = {};
  st.written.clear();
  locks_.release_all(txn);
  waits_for_.erase(txn);
  ++wake_epoch_;
  cv_.notify_all();
  return info;
}

void Engine::abort_locked(TxnId txn) {
  auto it = txns_.find(txn);
  if (it == txns_.end() || it->second.status != TxnStatus::Active) return;
  TxnState& st = it->second;
  for (auto u = st.undo.rbegin(); u != st.undo.rend(); ++u) {
    Table& table = db_.table(u->table);
    if (u->before) {
      table.put(*u->before);
    } else {
      table.erase(u->key);
    }
  }
  st.undo.clear();
  st.update = {};
  st.written.clear();
  st.status = TxnStatus::Aborted;
  locks_.release_all(txn);
  waits_for_.erase(txn);
  ++wake_epoch_;
  cv_.notify_all();
}

void Engine::abort(TxnId txn) {
  std::lock_guard lock(mu_);
  abort_locked(txn);
}

CommitInfo Engine::apply(const StateUpdate& u) {
  while (true) {
    TxnId txn = begin();
    bool retry = false;
    for (const auto& stmt : u.statements) {
      ExecResult r = exec_stmt(txn, stmt);
      if (r.status == ExecStatus::Deadlock) {
        retry = true;
        break;
      }
      if (r.status == ExecStatus::ConstraintViolation) {
        abort(txn);
        throw ApplyError("apply failed on '" + to_sql(stmt) + "': " + r.message);
      }
    }
    if (!retry) return commit(txn);
  }
}

TxnStatus Engine::status(TxnId txn) const {
  std::lock_guard lock(mu_);
  auto it = txns_.find(txn);
  if (it == txns_.end()) throw std::logic_error("unknown transaction " + std::to_string(txn));
  return it->second.status;
}

bool Engine::doomed(TxnId txn) const {
  std::lock_guard lock(mu_);
  auto it = txns_.find(txn);
  return it != txns_.end() && it->second.doomed;
}

std::uint64_t Engine::wake_epoch() const {
  std::lock_guard lock(mu_);
  return wake_epoch_;
}

std::size_t Engine::active_transactions() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(txns_.begin(), txns_.end(), [](const auto& e) { return e.second.status == TxnStatus::Active; }));
}

std::uint64_t Engine::commits() const {
  std::lock_guard lock(mu_);
  return commit_seq_;
}

Database Engine::snapshot() const {
  std::lock_guard lock(mu_);
  return db_;
}

std::string Engine::dump() const {
  std::lock_guard lock(mu_);
  return db_.dump();
}

std::string Engine::digest() const {
  std::lock_guard lock(mu_);
  return db_.digest();
}

}  // namespace opart
