#include <algorithm>

#include "opart/store.hpp"

namespace opart {

std::string to_string(LockMode m) {
  switch (m) {
    case LockMode::IS: return "IS";
    case LockMode::IX: return "IX";
    case LockMode::S: return "S";
    case LockMode::SIX: return "SIX";
    case LockMode::X: return "X";
  }
  return "?";
}

bool compatible(LockMode held, LockMode requested) {
  // Standard multi-granularity matrix, rows = held, columns = requested.
  static constexpr bool kMatrix[5][5] = {
      //            IS     IX     S      SIX    X
      /* IS  */ {true, true, true, true, false},
      /* IX  */ {true, true, false, false, false},
      /* S   */ {true, false, true, false, false},
      /* SIX */ {true, false, false, false, false},
      /* X   */ {false, false, false, false, false},
  };
  return kMatrix[static_cast<int>(held)][static_cast<int>(requested)];
}

LockMode combine(LockMode a, LockMode b) {
  if (a == b) return a;
  if (a == LockMode::X || b == LockMode::X) return LockMode::X;
  if (a == LockMode::IS) return b;
  if (b == LockMode::IS) return a;
  // Remaining distinct pairs among IX, S, SIX all join at SIX.
  return LockMode::SIX;
}

bool LockManager::try_acquire(TxnId txn, const LockResource& res, LockMode mode, std::vector<TxnId>& blockers) {
  blockers.clear();
  auto& holders = table_[res];
  LockMode wanted = mode;
  if (auto it = holders.find(txn); it != holders.end()) {
    wanted = combine(it->second, mode);
    if (wanted == it->second) return true;
  }
  for (const auto& [other, held] : holders) {
    if (other != txn && !compatible(held, wanted)) blockers.push_back(other);
  }
  if (auto w = waiting_.find(res); w != waiting_.end()) {
    for (const auto& [other, want] : w->second) {
      if (other >= txn) break;
      if (!compatible(want, wanted) && std::find(blockers.begin(), blockers.end(), other) == blockers.end()) {
        blockers.push_back(other);
      }
    }
  }
  if (!blockers.empty()) {
    if (holders.empty()) table_.erase(res);
    stop_waiting(txn);
    waiting_[res][txn] = wanted;
    waiting_on_.emplace(txn, res);
    return false;
  }
  stop_waiting(txn);
  holders[txn] = wanted;
  by_txn_[txn].insert(res);
  return true;
}

void LockManager::stop_waiting(TxnId txn) {
  auto it = waiting_on_.find(txn);
  if (it == waiting_on_.end()) return;
  auto w = waiting_.find(it->second);
  w->second.erase(txn);
  if (w->second.empty()) waiting_.erase(w);
  waiting_on_.erase(it);
}

void LockManager::release_all(TxnId txn) {
  stop_waiting(txn);
  auto it = by_txn_.find(txn);
  if (it == by_txn_.end()) return;
  for (const auto& res : it->second) {
    auto h = table_.find(res);
    if (h == table_.end()) continue;
    h->second.erase(txn);
    if (h->second.empty()) table_.erase(h);
  }
  by_txn_.erase(it);
}

std::optional<LockMode> LockManager::held(TxnId txn, const LockResource& res) const {
  auto h = table_.find(res);
  if (h == table_.end()) return std::nullopt;
  auto it = h->second.find(txn);
  if (it == h->second.end()) return std::nullopt;
  return it->second;
}

std::size_t LockManager::lock_count(TxnId txn) const {
  auto it = by_txn_.find(txn);
  return it == by_txn_.end() ? 0 : it->second.size();
}

}  // namespace opart
