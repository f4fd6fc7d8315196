#include "opart/condition.hpp"

#include <algorithm>

namespace opart {

ConditionDNF conjoin(const ConditionDNF& a, const ConditionDNF& b) {
  ConditionDNF out;
  out.clauses.reserve(a.clauses.size() * b.clauses.size());
  for (const auto& x : a.clauses) {
    for (const auto& y : b.clauses) {
      Conjunction c;
      c.atoms.reserve(x.atoms.size() + y.atoms.size());
      c.atoms.insert(c.atoms.end(), x.atoms.begin(), x.atoms.end());
      c.atoms.insert(c.atoms.end(), y.atoms.begin(), y.atoms.end());
      out.clauses.push_back(std::move(c));
    }
  }
  return out;
}

ConditionDNF disjoin(const ConditionDNF& a, const ConditionDNF& b) {
  ConditionDNF out = a;
  out.clauses.insert(out.clauses.end(), b.clauses.begin(), b.clauses.end());
  return out;
}

EqualityClosure::EqualityClosure(const Conjunction& clause) {
  for (const auto& atom : clause.atoms) {
    const auto* eq = std::get_if<EqAtom>(&atom);
    if (eq == nullptr) continue;
    unite(intern(eq->lhs), intern(eq->rhs));
  }
}

int EqualityClosure::index_of(const Term& t) const {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i] == t) return static_cast<int>(i);
  }
  return -1;
}

int EqualityClosure::intern(const Term& t) {
  if (int i = index_of(t); i >= 0) return i;
  terms_.push_back(t);
  parent_.push_back(static_cast<int>(parent_.size()));
  const_of_root_.push_back(std::holds_alternative<Const>(t) ? static_cast<int>(terms_.size()) - 1 : -1);
  return static_cast<int>(terms_.size()) - 1;
}

int EqualityClosure::find(int i) const {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void EqualityClosure::unite(int a, int b) {
  int ra = find(a);
  int rb = find(b);
  if (ra == rb) return;
  int ca = const_of_root_[ra];
  int cb = const_of_root_[rb];
  if (ca >= 0 && cb >= 0 && !(terms_[ca] == terms_[cb])) consistent_ = false;
  parent_[rb] = ra;
  if (ca < 0) const_of_root_[ra] = cb;
}

bool EqualityClosure::equal(const Term& a, const Term& b) const {
  if (a == b) return true;
  int ia = index_of(a);
  int ib = index_of(b);
  if (ia < 0 || ib < 0) return false;
  return find(ia) == find(ib);
}

bool is_satisfiable(const Conjunction& clause) { return EqualityClosure(clause).consistent(); }

bool is_satisfiable(const ConditionDNF& condition) {
  return std::any_of(condition.clauses.begin(), condition.clauses.end(),
                     [](const Conjunction& c) { return is_satisfiable(c); });
}

bool implies_colocation(const Conjunction& clause, const Param& k, const Param& k2) {
  EqualityClosure closure(clause);
  for (const auto& t : closure.terms()) {
    if (!std::holds_alternative<Attribute>(t)) continue;
    if (closure.equal(t, Term{k}) && closure.equal(t, Term{k2})) return true;
  }
  return false;
}

ConditionDNF remove_colocated_clauses(const ConditionDNF& c, const Param& k, const Param& k2) {
  return remove_colocated_clauses(c, std::span<const Param>(&k, 1), std::span<const Param>(&k2, 1));
}

ConditionDNF remove_colocated_clauses(const ConditionDNF& c, std::span<const Param> ks,
                                      std::span<const Param> k2s) {
  ConditionDNF out;
  for (const auto& clause : c.clauses) {
    bool removed = false;
    for (const auto& k : ks) {
      for (const auto& k2 : k2s) {
        if (implies_colocation(clause, k, k2)) {
          removed = true;
          break;
        }
      }
      if (removed) break;
    }
    if (!removed) out.clauses.push_back(clause);
  }
  return out;
}

Term retag(const Term& t, int instance) {
  if (const auto* p = std::get_if<Param>(&t)) return Param{instance, p->name};
  return t;
}

Conjunction retag(const Conjunction& c, int instance) {
  Conjunction out;
  out.atoms.reserve(c.atoms.size());
  for (const auto& a : c.atoms) {
    if (const auto* eq = std::get_if<EqAtom>(&a)) {
      out.atoms.emplace_back(EqAtom{retag(eq->lhs, instance), retag(eq->rhs, instance)});
    } else {
      out.atoms.push_back(a);
    }
  }
  return out;
}

std::string to_string(const Term& t) {
  struct Visitor {
    std::string operator()(const Attribute& a) const { return a.table + "." + a.column; }
    std::string operator()(const Param& p) const { return p.instance == 0 ? p.name : p.name + "'"; }
    std::string operator()(const Const& c) const { return to_sql_literal(c.value); }
  };
  return std::visit(Visitor{}, t);
}

std::string to_string(const Atom& a) {
  if (const auto* eq = std::get_if<EqAtom>(&a)) return to_string(eq->lhs) + " = " + to_string(eq->rhs);
  return "{" + std::get<OpaqueAtom>(a).description + "}";
}

std::string to_string(const Conjunction& c) {
  if (c.atoms.empty()) return "TRUE";
  std::string out = "(";
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    if (i > 0) out += " AND ";
    out += to_string(c.atoms[i]);
  }
  return out + ")";
}

std::string to_string(const ConditionDNF& c) {
  if (c.clauses.empty()) return "FALSE";
  std::string out;
  for (std::size_t i = 0; i < c.clauses.size(); ++i) {
    if (i > 0) out += " OR ";
    out += to_string(c.clauses[i]);
  }
  return out;
}

}  // namespace opart
