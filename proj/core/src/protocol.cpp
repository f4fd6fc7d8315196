#include <algorithm>
#include <stdexcept>

#include "opart/protocol.hpp"

namespace opart {

int partition_of(const Value& v, int n) { return static_cast<int>(stable_hash(v) % static_cast<std::uint64_t>(n)); }

int home_of_unpartitioned(const std::string& txn, int n) {
  return static_cast<int>(fnv1a(txn) % static_cast<std::uint64_t>(n));
}

Router::Router(const std::vector<TxnClassification>& classes, int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("server count must be at least 1");
  for (const auto& c : classes) classes_.emplace(c.name, c);
}

const TxnClassification& Router::classification(const std::string& txn) const {
  auto it = classes_.find(txn);
  if (it == classes_.end()) throw std::invalid_argument("unknown transaction '" + txn + "'");
  return it->second;
}

RouteDecision Router::route(const std::string& txn, const Args& args) const {
  const TxnClassification& c = classification(txn);
  std::vector<int> candidates;
  for (const auto& p : c.parameters) {
    auto it = args.find(p);
    if (it == args.end()) throw std::invalid_argument("operation " + txn + " lacks argument '" + p + "'");
    candidates.push_back(partition_of(it->second, n_));
  }
  switch (c.op_class) {
    case OpClass::Commutative: return {OpClass::Commutative, std::nullopt};
    case OpClass::Local:
      // A Local without parameters only reads replicated data.
      if (candidates.empty()) return {OpClass::Local, std::nullopt};
      return {OpClass::Local, candidates.front()};
    case OpClass::Global:
      if (candidates.empty()) return {OpClass::Global, home_of_unpartitioned(txn, n_)};
      return {OpClass::Global, candidates.front()};
    case OpClass::LocalOrGlobal: {
      bool same = std::all_of(candidates.begin(), candidates.end(), [&](int s) { return s == candidates.front(); });
      return {same ? OpClass::Local : OpClass::Global, candidates.front()};
    }
  }
  return {};
}

RequestAction decide_request(const Router& router, int self, const std::string& txn, const Args& args) {
  RouteDecision d = router.route(txn, args);
  RequestAction a;
  a.op_class = d.op_class;
  if (d.server && *d.server != self) {
    a.kind = RequestAction::Redirect;
    a.target = *d.server;
    return a;
  }
  a.target = self;
  a.kind = d.op_class == OpClass::Global ? RequestAction::Enqueue : RequestAction::ExecuteNow;
  return a;
}

TokenIntake take_in(Token& token, int self) {
  TokenIntake out;
  std::vector<TokenEntry> kept;
  for (auto& e : token.entries) {
    if (e.origin == self) {
      out.purged.push_back(e.op_id);
    } else {
      out.to_apply.push_back(e);
      kept.push_back(std::move(e));
    }
  }
  token.entries = std::move(kept);
  return out;
}

void PendingQueue::push(Operation op, int client) {
  std::lock_guard lock(mu_);
  items_.push_back(Item{std::move(op), client});
}

std::vector<PendingQueue::Item> PendingQueue::atomic_snapshot() {
  std::lock_guard lock(mu_);
  std::vector<Item> out;
  out.swap(items_);
  return out;
}

std::size_t PendingQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

}  // namespace opart
