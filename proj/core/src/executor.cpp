#include "opart/protocol.hpp"

namespace opart {

std::vector<Statement> bind_operation(const TransactionTemplate& t, const Args& args) {
  std::vector<Statement> out;
  out.reserve(t.body.size());
  for (const auto& s : t.body) out.push_back(bind(s, args));
  return out;
}

std::string reply_fragment(const Statement& s, const ExecResult& r) {
  if (!std::holds_alternative<SelectStmt>(s)) return "#" + std::to_string(r.affected);
  std::string out = "[";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i > 0) out += ", ";
    out += "(";
    for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
      if (j > 0) out += ", ";
      out += to_sql_literal(r.rows[i][j]);
    }
    out += ")";
  }
  return out + "]";
}

OpRunner::OpRunner(Engine& engine, std::vector<Statement> statements, bool apply_mode)
    : engine_(&engine), statements_(std::move(statements)), apply_mode_(apply_mode), txn_(engine.begin()) {}

OpRunner::Step OpRunner::step() {
  const Statement& s = statements_.at(next_);
  ExecResult r = engine_->try_exec_stmt(txn_, s);
  switch (r.status) {
    case ExecStatus::WouldBlock: return Step::Blocked;
    case ExecStatus::Deadlock: return Step::Deadlock;
    case ExecStatus::ConstraintViolation:
      if (apply_mode_) {
        engine_->abort(txn_);
        throw ApplyError("apply failed on '" + to_sql(s) + "': " + r.message);
      }
      r.affected = 0;
      break;
    case ExecStatus::Ok: break;
  }
  if (!reply_.empty()) reply_ += " ";
  reply_ += reply_fragment(s, r);
  ++next_;
  return Step::Ok;
}

void OpRunner::restart() {
  engine_->abort(txn_);
  txn_ = engine_->begin();
  next_ = 0;
  reply_.clear();
}

CommitInfo OpRunner::commit(UpdateQueue* sink, std::optional<std::uint64_t> op_id) {
  return engine_->commit(txn_, sink, op_id);
}

void OpRunner::abort() { engine_->abort(txn_); }

Outcome execute(Engine& engine, const std::vector<Statement>& statements, UpdateQueue* sink,
                std::optional<std::uint64_t> op_id) {
  while (true) {
    TxnId txn = engine.begin();
    std::string reply;
    bool deadlock = false;
    for (const auto& s : statements) {
      ExecResult r = engine.exec_stmt(txn, s);
      if (r.status == ExecStatus::Deadlock) {
        deadlock = true;
        break;
      }
      if (r.status == ExecStatus::ConstraintViolation) r.affected = 0;
      if (!reply.empty()) reply += " ";
      reply += reply_fragment(s, r);
    }
    if (deadlock) continue;
    Outcome out;
    out.reply = std::move(reply);
    out.commit = engine.commit(txn, sink, op_id);
    return out;
  }
}

}  // namespace opart
