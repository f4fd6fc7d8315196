#include "opart/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace opart {

std::string to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::WriteWrite: return "write-write";
    case ConflictKind::FirstReadsSecond: return "t-reads-from-t'";
    case ConflictKind::SecondReadsFirst: return "t'-reads-from-t";
  }
  return "?";
}

const std::string* ConflictRecord::writer() const {
  switch (kind) {
    case ConflictKind::WriteWrite: return nullptr;
    case ConflictKind::FirstReadsSecond: return &second;
    case ConflictKind::SecondReadsFirst: return &first;
  }
  return nullptr;
}

const std::string* ConflictRecord::reader() const {
  switch (kind) {
    case ConflictKind::WriteWrite: return nullptr;
    case ConflictKind::FirstReadsSecond: return &first;
    case ConflictKind::SecondReadsFirst: return &second;
  }
  return nullptr;
}

namespace {

bool intersects(const std::vector<Attribute>& a, const std::vector<Attribute>& b,
                const std::set<Attribute>* restrict_to = nullptr) {
  // Both sorted.
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      if (restrict_to == nullptr || restrict_to->count(*i) != 0) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

ConditionDNF pair_condition(const AccessEntry& x, const AccessEntry& y) {
  ConditionDNF left;
  for (const auto& c : x.condition.clauses) left.clauses.push_back(retag(c, 0));
  ConditionDNF right;
  for (const auto& c : y.condition.clauses) right.clauses.push_back(retag(c, 1));
  return conjoin(left, right);
}

// Accumulates (x.C ∧ y.C) over every entry pair with overlapping attributes.
ConditionDNF accumulate(const std::vector<AccessEntry>& xs, const std::vector<AccessEntry>& ys,
                        const std::set<Attribute>* restrict_to) {
  ConditionDNF out = ConditionDNF::never();
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      if (intersects(x.attributes, y.attributes, restrict_to)) out = disjoin(out, pair_condition(x, y));
    }
  }
  return out;
}

std::vector<Param> tagged(const std::vector<std::string>& names, int instance) {
  std::vector<Param> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(Param{instance, n});
  return out;
}

}  // namespace

std::vector<ConflictRecord> detect_conflicts(std::span<const TransactionTemplate> templates,
                                             const DetectOptions& options) {
  std::set<Attribute> observable;
  for (const auto& t : templates) {
    for (const auto& r : t.read_set) observable.insert(r.attributes.begin(), r.attributes.end());
  }
  const std::set<Attribute>* ww_filter = options.skip_unobservable_writes ? &observable : nullptr;

  std::vector<ConflictRecord> out;
  auto keep = [&](const TransactionTemplate& t, const TransactionTemplate& u, ConflictKind kind, ConditionDNF c) {
    if (is_satisfiable(c)) out.push_back(ConflictRecord{t.name, u.name, kind, std::move(c)});
  };
  for (std::size_t i = 0; i < templates.size(); ++i) {
    for (std::size_t j = i; j < templates.size(); ++j) {
      const auto& t = templates[i];
      const auto& u = templates[j];
      keep(t, u, ConflictKind::WriteWrite, accumulate(t.write_set, u.write_set, ww_filter));
      keep(t, u, ConflictKind::FirstReadsSecond, accumulate(t.read_set, u.write_set, nullptr));
      if (i != j) keep(t, u, ConflictKind::SecondReadsFirst, accumulate(t.write_set, u.read_set, nullptr));
    }
  }
  return out;
}

const std::vector<std::string>& PartitioningArray::of(const std::string& txn) const {
  static const std::vector<std::string> kNone;
  auto it = assignment.find(txn);
  return it == assignment.end() ? kNone : it->second;
}

bool survives(const ConflictRecord& record, const std::vector<std::string>& first_params,
              const std::vector<std::string>& second_params) {
  if (first_params.empty() || second_params.empty()) return is_satisfiable(record.condition);
  auto ks = tagged(first_params, 0);
  auto k2s = tagged(second_params, 1);
  return is_satisfiable(remove_colocated_clauses(record.condition, ks, k2s));
}

std::vector<ConflictRecord> residual_conflicts(const PartitioningArray& p,
                                               std::span<const ConflictRecord> conflicts) {
  std::vector<ConflictRecord> out;
  for (const auto& r : conflicts) {
    if (survives(r, p.of(r.first), p.of(r.second))) out.push_back(r);
  }
  return out;
}

double weight_of(std::span<const TransactionTemplate> templates, const std::string& name) {
  for (const auto& t : templates) {
    if (t.name == name) return t.weight;
  }
  return 1.0;
}

double cost(const PartitioningArray& p, std::span<const ConflictRecord> conflicts,
            std::span<const TransactionTemplate> templates) {
  double total = 0.0;
  for (const auto& r : conflicts) {
    if (survives(r, p.of(r.first), p.of(r.second))) {
      total += weight_of(templates, r.first) + weight_of(templates, r.second);
    }
  }
  return total;
}

namespace {

using Option = std::vector<std::string>;

std::vector<Option> candidate_options(const TransactionTemplate& t, std::size_t max_params) {
  std::vector<Option> out{{}};
  const auto& ps = t.parameters;
  std::size_t n = ps.size();
  std::size_t limit = std::min(max_params, n);
  if (n > 20) limit = std::min<std::size_t>(limit, 1);  // subsets of very wide signatures are not enumerated
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << std::min<std::size_t>(n, 20)); ++mask) {
    auto bits = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (bits > limit) continue;
    Option o;
    for (std::size_t b = 0; b < n; ++b) {
      if ((mask >> b) & 1U) o.push_back(ps[b]);
    }
    out.push_back(std::move(o));
  }
  if (n > 20) {
    for (std::size_t b = 20; b < n; ++b) out.push_back({ps[b]});
  }
  // Singles first, then pairs, ... each group in declaration order.
  std::stable_sort(out.begin() + 1, out.end(), [](const Option& a, const Option& b) { return a.size() < b.size(); });
  return out;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

bool nearly_equal(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

std::uint64_t raw_search_space(std::span<const TransactionTemplate> templates, const OptimizeOptions& options) {
  std::uint64_t space = 1;
  for (const auto& t : templates) {
    space = saturating_mul(space, candidate_options(t, options.max_params_per_txn).size());
  }
  return space;
}

PartitioningArray optimize_partitioning(std::span<const TransactionTemplate> templates,
                                        std::span<const ConflictRecord> conflicts,
                                        const OptimizeOptions& options) {
  const std::size_t n = templates.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[templates[i].name] = i;

  std::vector<bool> conflicting(n, false);
  for (const auto& r : conflicts) {
    conflicting[index.at(r.first)] = true;
    conflicting[index.at(r.second)] = true;
  }

  std::vector<std::vector<Option>> opts(n);
  for (std::size_t i = 0; i < n; ++i) {
    opts[i] = conflicting[i] ? candidate_options(templates[i], options.max_params_per_txn) : std::vector<Option>{{}};
  }

  struct Rec {
    std::size_t a;
    std::size_t b;
    double weight;
    std::vector<char> table;  // survive[oa * |opts b| + ob]
  };
  auto build_tables = [&](const std::vector<std::vector<Option>>& options_now) {
    std::vector<Rec> recs;
    recs.reserve(conflicts.size());
    for (const auto& r : conflicts) {
      Rec rec{index.at(r.first), index.at(r.second), 0.0, {}};
      rec.weight = templates[rec.a].weight + templates[rec.b].weight;
      const auto& oa = options_now[rec.a];
      const auto& ob = options_now[rec.b];
      rec.table.resize(oa.size() * ob.size());
      for (std::size_t x = 0; x < oa.size(); ++x) {
        for (std::size_t y = 0; y < ob.size(); ++y) {
          // Self pairs route both sides by the same option.
          bool diag_only = rec.a == rec.b && x != y;
          rec.table[x * ob.size() + y] = diag_only ? 0 : static_cast<char>(survives(r, oa[x], ob[y]));
        }
      }
      recs.push_back(std::move(rec));
    }
    return recs;
  };

  // Drop options whose survive rows match "no parameter" everywhere.
  {
    std::vector<Rec> recs = build_tables(opts);
    std::vector<std::vector<Option>> pruned(n);
    for (std::size_t t = 0; t < n; ++t) {
      pruned[t].push_back({});
      for (std::size_t o = 1; o < opts[t].size(); ++o) {
        bool useful = false;
        for (const auto& rec : recs) {
          const std::size_t nb = opts[rec.b].size();
          if (rec.a == t && rec.b == t) {
            useful = rec.table[o * nb + o] != rec.table[0];
          } else if (rec.a == t) {
            for (std::size_t y = 0; y < nb && !useful; ++y) useful = rec.table[o * nb + y] != rec.table[y];
          } else if (rec.b == t) {
            for (std::size_t x = 0; x < opts[rec.a].size() && !useful; ++x) {
              useful = rec.table[x * nb + o] != rec.table[x * nb];
            }
          }
          if (useful) break;
        }
        if (useful) pruned[t].push_back(opts[t][o]);
      }
    }
    opts = std::move(pruned);
  }

  std::uint64_t space = 1;
  for (const auto& o : opts) space = saturating_mul(space, o.size());
  if (space > options.max_candidates) throw SearchCapExceeded(space);

  std::vector<Rec> recs = build_tables(opts);

  // Name order for the lexicographic tie-break.
  std::vector<std::size_t> by_name(n);
  for (std::size_t i = 0; i < n; ++i) by_name[i] = i;
  std::sort(by_name.begin(), by_name.end(), [&](auto x, auto y) { return templates[x].name < templates[y].name; });

  std::vector<std::size_t> cur(n, 0);
  std::vector<std::size_t> best;
  double best_cost = 0.0;
  int best_globals = 0;
  std::vector<char> global(n);

  auto count_globals = [&](const std::vector<std::size_t>& choice) {
    std::fill(global.begin(), global.end(), 0);
    for (std::size_t r = 0; r < recs.size(); ++r) {
      const auto& rec = recs[r];
      if (!rec.table[choice[rec.a] * opts[rec.b].size() + choice[rec.b]]) continue;
      const auto& cr = conflicts[r];
      if (cr.kind == ConflictKind::WriteWrite) {
        global[rec.a] = global[rec.b] = 1;
      } else {
        global[index.at(*cr.writer())] = 1;
      }
    }
    return static_cast<int>(std::count(global.begin(), global.end(), 1));
  };
  auto lex_less = [&](const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
    for (std::size_t i : by_name) {
      const Option& a = opts[i][x[i]];
      const Option& b = opts[i][y[i]];
      if (a != b) return a < b;
    }
    return false;
  };

  while (true) {
    double c = 0.0;
    for (const auto& rec : recs) {
      if (rec.table[cur[rec.a] * opts[rec.b].size() + cur[rec.b]]) c += rec.weight;
    }
    if (best.empty() || (!nearly_equal(c, best_cost) && c < best_cost)) {
      best = cur;
      best_cost = c;
      best_globals = count_globals(cur);
    } else if (nearly_equal(c, best_cost)) {
      int g = count_globals(cur);
      if (g < best_globals || (g == best_globals && lex_less(cur, best))) {
        best = cur;
        best_globals = g;
      }
    }
    std::size_t d = 0;
    while (d < n) {
      if (++cur[d] < opts[d].size()) break;
      cur[d] = 0;
      ++d;
    }
    if (d == n) break;
  }

  PartitioningArray p;
  for (std::size_t i = 0; i < n; ++i) p.assignment[templates[i].name] = opts[i][best[i]];
  return p;
}

std::string to_string(OpClass c) {
  switch (c) {
    case OpClass::Commutative: return "commutative";
    case OpClass::Local: return "local";
    case OpClass::Global: return "global";
    case OpClass::LocalOrGlobal: return "local/global";
  }
  return "?";
}

OpClass op_class_from_string(const std::string& s) {
  if (s == "commutative") return OpClass::Commutative;
  if (s == "local") return OpClass::Local;
  if (s == "global") return OpClass::Global;
  if (s == "local/global") return OpClass::LocalOrGlobal;
  throw std::invalid_argument("unknown operation class '" + s + "'");
}

const TxnClassification* ClassificationReport::find(const std::string& name) const {
  for (const auto& t : transactions) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

ClassCounts ClassificationReport::counts() const {
  ClassCounts c;
  for (const auto& t : transactions) {
    switch (t.op_class) {
      case OpClass::Commutative: ++c.commutative; break;
      case OpClass::Local: ++c.local; break;
      case OpClass::Global: ++c.global; break;
      case OpClass::LocalOrGlobal: ++c.local_or_global; break;
    }
    if (t.read_only) ++c.read_only;
    ++c.total;
  }
  return c;
}

namespace {

ClassificationReport classify_once(std::span<const TransactionTemplate> templates, const PartitioningArray& p,
                                   std::span<const ConflictRecord> conflicts) {
  ClassificationReport report;
  report.residual = residual_conflicts(p, conflicts);
  report.total_cost = cost(p, conflicts, templates);
  for (const auto& t : templates) {
    TxnClassification c;
    c.name = t.name;
    c.parameters = p.of(t.name);
    c.read_only = t.read_only();
    c.weight = t.weight;
    bool conflicts_at_all = std::any_of(conflicts.begin(), conflicts.end(),
                                        [&](const ConflictRecord& r) { return r.involves(t.name); });
    if (!conflicts_at_all) {
      c.op_class = OpClass::Commutative;
      c.parameters.clear();
    } else {
      bool global = std::any_of(report.residual.begin(), report.residual.end(), [&](const ConflictRecord& r) {
        if (r.kind == ConflictKind::WriteWrite) return r.involves(t.name);
        return *r.writer() == t.name;
      });
      if (global) {
        c.op_class = OpClass::Global;
      } else {
        c.op_class = c.parameters.size() >= 2 ? OpClass::LocalOrGlobal : OpClass::Local;
      }
    }
    report.transactions.push_back(std::move(c));
  }
  return report;
}

// A global instance of a multi-parameter transaction runs at the server of its
// first parameter, so it only sees non-replicated writes keyed by that one.
bool global_instance_sound(const TxnClassification& t, const ClassificationReport& report,
                           std::span<const ConflictRecord> conflicts) {
  const std::vector<std::string> home{t.parameters.front()};
  for (const auto& r : conflicts) {
    if (!r.involves(t.name)) continue;
    if (r.first == t.name && r.second == t.name) {
      if (survives(r, home, t.parameters) || survives(r, t.parameters, home)) return false;
      continue;
    }
    const std::string& other = r.first == t.name ? r.second : r.first;
    const TxnClassification* o = report.find(other);
    if (o->op_class == OpClass::Global) continue;
    if (r.kind != ConflictKind::WriteWrite && *r.reader() != t.name) continue;
    bool alive = r.first == t.name ? survives(r, home, o->parameters) : survives(r, o->parameters, home);
    if (alive) return false;
  }
  return true;
}

}  // namespace

ClassificationReport classify(std::span<const TransactionTemplate> templates, const PartitioningArray& p,
                              std::span<const ConflictRecord> conflicts) {
  PartitioningArray routed = p;
  while (true) {
    ClassificationReport report = classify_once(templates, routed, conflicts);
    bool changed = false;
    for (const auto& c : report.transactions) {
      if (c.parameters.size() < 2) continue;
      bool reduce = c.op_class == OpClass::Global ||
                    (c.op_class == OpClass::LocalOrGlobal && !global_instance_sound(c, report, conflicts));
      if (reduce) {
        routed.assignment[c.name] = {c.parameters.front()};
        changed = true;
      }
    }
    if (!changed) return report;
  }
}

PartitionResult run_partitioning(std::vector<TransactionTemplate> templates, const Schema& schema,
                                 const PartitionOptions& options) {
  PartitionResult out;
  for (auto& t : templates) {
    auto it = options.weights.find(t.name);
    if (it != options.weights.end()) {
      if (it->second < 0) throw std::invalid_argument("negative weight for '" + t.name + "'");
      t.weight = it->second;
    }
    out.templates.push_back(derive_access_sets(std::move(t), schema));
  }
  out.conflicts = detect_conflicts(out.templates, options.detect);
  out.partitioning = optimize_partitioning(out.templates, out.conflicts, options.optimize);
  out.report = classify(out.templates, out.partitioning, out.conflicts);
  for (const auto& c : out.report.transactions) {
    if (c.op_class != OpClass::Commutative) out.partitioning.assignment[c.name] = c.parameters;
  }
  return out;
}

}  // namespace opart
