#pragma once

// Conflict conditions: disjunctions of conjunctions of equality atoms over
// table attributes, transaction parameters and constants.

#include <compare>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "opart/value.hpp"

namespace opart {

/// A table column, standing for "the value of this column in the accessed row".
struct Attribute {
  std::string table;
  std::string column;
  auto operator<=>(const Attribute&) const = default;
};

/// A transaction input parameter. `instance` tells the two sides of a pair
/// apart (0 for t, 1 for t'), so sid of t and sid of t' are different symbols.
struct Param {
  int instance = 0;
  std::string name;
  auto operator<=>(const Param&) const = default;
};

struct Const {
  Value value;
  auto operator<=>(const Const&) const = default;
};

using Term = std::variant<Attribute, Param, Const>;

struct EqAtom {
  Term lhs;
  Term rhs;
};

/// Any predicate that is not an equality (ranges, LIKE, ...). Never falsifies
/// a clause and never participates in co-location.
struct OpaqueAtom {
  std::string description;
};

using Atom = std::variant<EqAtom, OpaqueAtom>;

struct Conjunction {
  std::vector<Atom> atoms;
};

/// Empty clause list is FALSE; a clause with no atoms is TRUE.
struct ConditionDNF {
  std::vector<Conjunction> clauses;

  static ConditionDNF never() { return {}; }
  static ConditionDNF always() { return ConditionDNF{{Conjunction{}}}; }
  static ConditionDNF of(Conjunction c) { return ConditionDNF{{std::move(c)}}; }
};

ConditionDNF conjoin(const ConditionDNF& a, const ConditionDNF& b);
ConditionDNF disjoin(const ConditionDNF& a, const ConditionDNF& b);

bool is_satisfiable(const Conjunction& clause);
bool is_satisfiable(const ConditionDNF& condition);

/// True iff the equality closure of `clause` puts both `k` and `k2` in the
/// class of one common Attribute.
bool implies_colocation(const Conjunction& clause, const Param& k, const Param& k2);

/// Drops every clause that implies k = A and k' = A for some attribute A.
ConditionDNF remove_colocated_clauses(const ConditionDNF& c, const Param& k, const Param& k2);

/// Multi-parameter variant: a clause is dropped when any (k, k') pair from the
/// two lists co-locates it.
ConditionDNF remove_colocated_clauses(const ConditionDNF& c, std::span<const Param> ks,
                                      std::span<const Param> k2s);

/// Returns `t` with every Param's instance tag replaced by `instance`.
Term retag(const Term& t, int instance);
Conjunction retag(const Conjunction& c, int instance);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Conjunction& c);
std::string to_string(const ConditionDNF& c);

/// Union-find over terms with constant-clash detection.
class EqualityClosure {
 public:
  explicit EqualityClosure(const Conjunction& clause);

  [[nodiscard]] bool consistent() const { return consistent_; }
  /// Equivalence test; unknown terms are only equal to themselves.
  [[nodiscard]] bool equal(const Term& a, const Term& b) const;
  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }

 private:
  int index_of(const Term& t) const;
  int intern(const Term& t);
  int find(int i) const;
  void unite(int a, int b);

  std::vector<Term> terms_;
  mutable std::vector<int> parent_;
  std::vector<int> const_of_root_;  // index of the Const term in the class, or -1
  bool consistent_ = true;
};

}  // namespace opart
