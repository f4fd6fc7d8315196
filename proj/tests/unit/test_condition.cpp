#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "opart/condition.hpp"

using namespace opart;

namespace {

Term attr(const std::string& t, const std::string& c) { return Attribute{t, c}; }
Term param(const std::string& n, int inst = 0) { return Param{inst, n}; }
Term cnst(std::int64_t v) { return Const{Value{v}}; }
Atom eq(Term a, Term b) { return EqAtom{std::move(a), std::move(b)}; }

// Semantic entailment by enumeration: does every assignment that satisfies
// the clause give k, k2 and some common attribute the same value?
bool entails_colocation(const Conjunction& clause, const Param& k, const Param& k2) {
  std::vector<Term> terms;
  auto add = [&](const Term& t) {
    if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
  };
  for (const auto& a : clause.atoms) {
    const auto& e = std::get<EqAtom>(a);
    add(e.lhs);
    add(e.rhs);
  }
  add(k);
  add(k2);
  std::vector<Term> attrs;
  for (const auto& t : terms) {
    if (std::holds_alternative<Attribute>(t)) attrs.push_back(t);
  }
  const int n = static_cast<int>(terms.size());
  auto index = [&](const Term& t) { return static_cast<int>(std::find(terms.begin(), terms.end(), t) - terms.begin()); };
  std::vector<bool> possible(attrs.size(), true);
  bool any_model = false;
  std::vector<int> val(n, 0);
  std::function<void(int)> go = [&](int i) {
    if (i == n) {
      for (const auto& a : clause.atoms) {
        const auto& e = std::get<EqAtom>(a);
        if (val[index(e.lhs)] != val[index(e.rhs)]) return;
      }
      any_model = true;
      for (std::size_t a = 0; a < attrs.size(); ++a) {
        int va = val[index(attrs[a])];
        if (val[index(k)] != va || val[index(k2)] != va) possible[a] = false;
      }
      return;
    }
    for (int v = 0; v < n; ++v) {
      val[i] = v;
      go(i + 1);
    }
  };
  go(0);
  if (!any_model) return true;
  return std::any_of(possible.begin(), possible.end(), [](bool b) { return b; });
}

}  // namespace

TEST(Condition, ConjoinDistributesClauses) {
  ConditionDNF a{{Conjunction{{eq(attr("SC", "ID"), param("sid"))}}}};
  ConditionDNF b{{Conjunction{{eq(attr("SC", "ID"), param("sid", 1)), eq(attr("SC", "I_ID"), param("iid", 1))}}}};
  ConditionDNF c = conjoin(a, b);
  ASSERT_EQ(c.clauses.size(), 1u);
  EXPECT_EQ(c.clauses[0].atoms.size(), 3u);
  EXPECT_EQ(to_string(c), "(SC.ID = sid AND SC.ID = sid' AND SC.I_ID = iid')");

  ConditionDNF two = disjoin(a, b);
  EXPECT_EQ(conjoin(two, two).clauses.size(), 4u);
  EXPECT_TRUE(conjoin(ConditionDNF::never(), a).clauses.empty());
  EXPECT_EQ(conjoin(ConditionDNF::always(), a).clauses.size(), 1u);
}

TEST(Condition, SatisfiabilityDetectsConstantClash) {
  Conjunction ok{{eq(attr("SC", "ID"), param("sid")), eq(attr("SC", "ID"), param("sid", 1))}};
  EXPECT_TRUE(is_satisfiable(ok));
  Conjunction clash{{eq(attr("T", "A"), cnst(1)), eq(attr("T", "A"), cnst(2))}};
  EXPECT_FALSE(is_satisfiable(clash));
  Conjunction transitive{{eq(param("x"), cnst(1)), eq(param("x"), param("y")), eq(param("y"), cnst(2))}};
  EXPECT_FALSE(is_satisfiable(transitive));
  Conjunction strings{{eq(attr("T", "A"), Const{Value{std::string("a")}}), eq(attr("T", "A"), cnst(1))}};
  EXPECT_FALSE(is_satisfiable(strings));
  EXPECT_FALSE(is_satisfiable(ConditionDNF::never()));
  EXPECT_TRUE(is_satisfiable(ConditionDNF::always()));
  EXPECT_TRUE(is_satisfiable(ConditionDNF{{clash, ok}}));
}

TEST(Condition, OpaqueAtomsNeverFalsify) {
  Conjunction c{{OpaqueAtom{"T.A LIKE x"}, eq(attr("T", "B"), param("k"))}};
  EXPECT_TRUE(is_satisfiable(c));
  EXPECT_EQ(to_string(Atom{OpaqueAtom{"T.A LIKE x"}}), "{T.A LIKE x}");
  EXPECT_FALSE(implies_colocation(Conjunction{{OpaqueAtom{"x"}}}, Param{0, "k"}, Param{1, "k"}));
}

TEST(Condition, ClauseRemovedWhenBothParametersBindTheSameAttribute) {
  Conjunction c{{eq(attr("SC", "ID"), param("sid")), eq(attr("SC", "ID"), param("sid", 1)),
                 eq(attr("SC", "I_ID"), param("iid", 1))}};
  ConditionDNF removed = remove_colocated_clauses(ConditionDNF::of(c), Param{0, "sid"}, Param{1, "sid"});
  EXPECT_TRUE(removed.clauses.empty());
  EXPECT_EQ(to_string(removed), "FALSE");
}

TEST(Condition, ClauseKeptWhenParametersBindDifferentAttributes) {
  Conjunction c{{eq(attr("SC", "ID"), param("sid")), eq(attr("SC", "ID"), param("sid", 1)),
                 eq(attr("SC", "I_ID"), param("iid", 1))}};
  ConditionDNF kept = remove_colocated_clauses(ConditionDNF::of(c), Param{0, "sid"}, Param{1, "iid"});
  EXPECT_EQ(kept.clauses.size(), 1u);
}

TEST(Condition, TransitiveEqualityCounts) {
  Conjunction c{{eq(param("k"), param("x")), eq(param("x"), attr("T", "ID")), eq(param("k", 1), attr("T", "ID"))}};
  EXPECT_TRUE(implies_colocation(c, Param{0, "k"}, Param{1, "k"}));
  // Equal to each other but never to a column.
  Conjunction no_attr{{eq(param("k"), param("k", 1))}};
  EXPECT_FALSE(implies_colocation(no_attr, Param{0, "k"}, Param{1, "k"}));
}

TEST(Condition, MultiParameterRemovalUsesAnyPair) {
  Conjunction c{{eq(attr("B", "U"), param("u")), eq(attr("B", "U"), param("u", 1)), eq(attr("I", "ID"), param("i")),
                 eq(attr("I", "ID"), param("i", 1))}};
  std::vector<Param> ks{{0, "u"}, {0, "i"}};
  std::vector<Param> k2s{{1, "i"}};
  EXPECT_TRUE(remove_colocated_clauses(ConditionDNF::of(c), ks, k2s).clauses.empty());
  std::vector<Param> wrong{{1, "x"}};
  EXPECT_EQ(remove_colocated_clauses(ConditionDNF::of(c), ks, wrong).clauses.size(), 1u);
}

TEST(Condition, RetagSwapsInstances) {
  Conjunction c{{eq(param("a"), attr("T", "X")), eq(param("b", 1), cnst(3))}};
  Conjunction r = retag(c, 1);
  EXPECT_EQ(to_string(r), "(a' = T.X AND b' = 3)");
}

TEST(Condition, ClosureMatchesEnumerationOracle) {
  std::mt19937 gen(20240501);
  const std::vector<Term> pool = {attr("T", "A"), attr("T", "B"), attr("U", "A"), param("k"), param("k", 1),
                                  param("x"),     param("y", 1)};
  int removed = 0;
  for (int round = 0; round < 400; ++round) {
    Conjunction c;
    int atoms = 1 + static_cast<int>(gen() % 4);
    for (int i = 0; i < atoms; ++i) {
      const Term& a = pool[gen() % pool.size()];
      const Term& b = pool[gen() % pool.size()];
      c.atoms.push_back(eq(a, b));
    }
    bool expected = entails_colocation(c, Param{0, "k"}, Param{1, "k"});
    EXPECT_EQ(implies_colocation(c, Param{0, "k"}, Param{1, "k"}), expected) << to_string(c);
    removed += expected ? 1 : 0;
  }
  EXPECT_GT(removed, 0);
}

TEST(Condition, EqualityClosureQueries) {
  Conjunction c{{eq(param("a"), param("b")), eq(param("b"), cnst(4))}};
  EqualityClosure cl(c);
  EXPECT_TRUE(cl.consistent());
  EXPECT_TRUE(cl.equal(param("a"), cnst(4)));
  EXPECT_FALSE(cl.equal(param("a"), param("z")));
  EXPECT_TRUE(cl.equal(param("z"), param("z")));
  EXPECT_EQ(cl.terms().size(), 3u);
}
