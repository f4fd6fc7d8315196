#pragma once

// Reference implementations used to cross-check the library. They share no
// code with the partitioner beyond the parsed access sets.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "opart/minisql.hpp"
#include "opart/partitioner.hpp"

namespace opart::oracle {

using Eq = std::pair<std::string, std::string>;
using Clause = std::vector<Eq>;

struct Record {
  std::string first;
  std::string second;
  ConflictKind kind = ConflictKind::WriteWrite;
  std::vector<Clause> clauses;  // pair conjunctions, one per overlapping entry pair
};

inline std::string key_of(const Term& t, int instance) {
  if (const auto* a = std::get_if<Attribute>(&t)) return "A:" + a->table + "." + a->column;
  if (const auto* p = std::get_if<Param>(&t)) return "P" + std::to_string(instance) + ":" + p->name;
  return "C:" + to_sql_literal(std::get<Const>(t).value);
}

inline Clause clause_of(const AccessEntry& e, int instance) {
  Clause out;
  for (const auto& c : e.condition.clauses) {
    for (const auto& a : c.atoms) {
      if (const auto* eq = std::get_if<EqAtom>(&a)) out.emplace_back(key_of(eq->lhs, instance), key_of(eq->rhs, instance));
    }
  }
  return out;
}

/// Union-find over string terms.
struct Classes {
  std::map<std::string, std::string> parent;

  std::string find(const std::string& x) {
    if (parent.count(x) == 0) parent[x] = x;
    std::string r = x;
    while (parent[r] != r) r = parent[r];
    return r;
  }
  void unite(const std::string& a, const std::string& b) { parent[find(a)] = find(b); }

  explicit Classes(const Clause& c) {
    for (const auto& [a, b] : c) unite(a, b);
  }

  bool consistent() {
    std::map<std::string, std::string> constant;
    for (const auto& [x, p] : std::map<std::string, std::string>(parent)) {
      if (x.rfind("C:", 0) != 0) continue;
      std::string r = find(x);
      auto it = constant.find(r);
      if (it != constant.end() && it->second != x) return false;
      constant[r] = x;
    }
    return true;
  }

  bool colocated(const std::string& k, const std::string& k2) {
    std::string rk = find(k);
    if (rk != find(k2)) return false;
    for (const auto& [x, p] : std::map<std::string, std::string>(parent)) {
      if (x.rfind("A:", 0) == 0 && find(x) == rk) return true;
    }
    return false;
  }
};

inline bool overlap(const std::vector<Attribute>& a, const std::vector<Attribute>& b,
                    const std::set<Attribute>* only) {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end() && (only == nullptr || only->count(x) != 0)) return true;
  }
  return false;
}

inline std::vector<Record> conflicts(const std::vector<TransactionTemplate>& ts, bool skip_unobservable = true) {
  std::set<Attribute> read;
  for (const auto& t : ts) {
    for (const auto& r : t.read_set) read.insert(r.attributes.begin(), r.attributes.end());
  }
  const std::set<Attribute>* only = skip_unobservable ? &read : nullptr;
  std::vector<Record> out;
  auto pairs = [&](const TransactionTemplate& t, const TransactionTemplate& u, const std::vector<AccessEntry>& xs,
                   const std::vector<AccessEntry>& ys, ConflictKind kind, const std::set<Attribute>* filter) {
    Record r{t.name, u.name, kind, {}};
    for (const auto& x : xs) {
      for (const auto& y : ys) {
        if (!overlap(x.attributes, y.attributes, filter)) continue;
        Clause c = clause_of(x, 0);
        Clause d = clause_of(y, 1);
        c.insert(c.end(), d.begin(), d.end());
        if (Classes(c).consistent()) r.clauses.push_back(c);
      }
    }
    if (!r.clauses.empty()) out.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i; j < ts.size(); ++j) {
      pairs(ts[i], ts[j], ts[i].write_set, ts[j].write_set, ConflictKind::WriteWrite, only);
      pairs(ts[i], ts[j], ts[i].read_set, ts[j].write_set, ConflictKind::FirstReadsSecond, nullptr);
      if (i != j) pairs(ts[i], ts[j], ts[i].write_set, ts[j].read_set, ConflictKind::SecondReadsFirst, nullptr);
    }
  }
  return out;
}

inline bool survives(const Record& r, const std::vector<std::string>& ks, const std::vector<std::string>& k2s) {
  for (const auto& c : r.clauses) {
    Classes cl(c);
    bool removed = false;
    for (const auto& k : ks) {
      for (const auto& k2 : k2s) removed = removed || cl.colocated("P0:" + k, "P1:" + k2);
    }
    if (!removed) return true;
  }
  return false;
}

inline double weight(const std::vector<TransactionTemplate>& ts, const std::string& name) {
  for (const auto& t : ts) {
    if (t.name == name) return t.weight;
  }
  return 1.0;
}

inline double cost(const std::vector<TransactionTemplate>& ts, const std::vector<Record>& rs,
                   const std::map<std::string, std::vector<std::string>>& p) {
  auto of = [&](const std::string& n) {
    auto it = p.find(n);
    return it == p.end() ? std::vector<std::string>{} : it->second;
  };
  double total = 0;
  for (const auto& r : rs) {
    if (survives(r, of(r.first), of(r.second))) total += weight(ts, r.first) + weight(ts, r.second);
  }
  return total;
}

/// Minimum cost over every single-parameter-or-none assignment.
inline double brute_force_min_cost(const std::vector<TransactionTemplate>& ts, const std::vector<Record>& rs) {
  double best = 1e300;
  std::map<std::string, std::vector<std::string>> p;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == ts.size()) {
      best = std::min(best, cost(ts, rs, p));
      return;
    }
    p[ts[i].name] = {};
    go(i + 1);
    for (const auto& param : ts[i].parameters) {
      p[ts[i].name] = {param};
      go(i + 1);
    }
  };
  go(0);
  return best;
}

/// Schema and a random template file over it (3 or 4 templates, 2 parameters each).
inline const char* random_app_schema() {
  return "-- opart-schema v1\n"
         "TABLE T1 (K, A, B) KEY (K);\n"
         "TABLE T2 (K, J, C) KEY (K, J);\n";
}

inline std::string random_app(std::mt19937_64& gen) {
  auto pick = [&](int n) { return static_cast<int>(gen() % static_cast<std::uint64_t>(n)); };
  const char* params[] = {"x", "y"};
  auto operand = [&]() -> std::string { return pick(6) == 0 ? std::to_string(pick(3)) : params[pick(2)]; };
  std::string out = "-- opart-templates v1\n";
  int count = 3 + pick(2);
  for (int t = 0; t < count; ++t) {
    out += "TXN t" + std::to_string(t) + "(x, y) {\n";
    int stmts = 1 + pick(3);
    for (int s = 0; s < stmts; ++s) {
      switch (pick(6)) {
        case 0: out += "  SELECT " + std::string(pick(2) ? "A" : "B") + " FROM T1 WHERE K = " + operand() + ";\n"; break;
        case 1: out += "  SELECT C FROM T2 WHERE K = " + operand() + (pick(2) ? " AND J = " + operand() : "") + ";\n"; break;
        case 2: out += "  UPDATE T1 SET " + std::string(pick(2) ? "A" : "B") + " = 1 WHERE K = " + operand() + ";\n"; break;
        case 3: out += "  UPDATE T2 SET C = C + 1 WHERE K = " + operand() + ";\n"; break;
        case 4: out += "  INSERT INTO T2 (K, J, C) VALUES (" + operand() + ", " + operand() + ", 0);\n"; break;
        default: out += "  DELETE FROM T1 WHERE K = " + operand() + ";\n"; break;
      }
    }
    out += "}\n";
  }
  return out;
}

}  // namespace opart::oracle
