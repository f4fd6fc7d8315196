#include <algorithm>
#include <stdexcept>

#include "opart/minisql.hpp"

namespace opart {

namespace {

void require_column(const TableDef& t, const std::string& column, const std::string& txn) {
  if (t.column_index(column) < 0) {
    throw SchemaError("transaction '" + txn + "': unknown column '" + column + "' in table '" + t.name + "'");
  }
}

void check_where(const TableDef& t, const std::vector<Predicate>& where, const std::string& txn) {
  for (const auto& p : where) require_column(t, p.column, txn);
}

std::vector<Attribute> attributes_of(const std::string& table, const std::vector<std::string>& columns) {
  std::vector<Attribute> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(Attribute{table, c});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Term operand_term(const Operand& o) {
  if (const auto* p = std::get_if<ParamRef>(&o)) return Param{0, p->name};
  return Const{std::get<Value>(o)};
}

Operand bind_operand(const Operand& o, const std::map<std::string, Value>& args) {
  const auto* p = std::get_if<ParamRef>(&o);
  if (p == nullptr) return o;
  auto it = args.find(p->name);
  if (it == args.end()) throw std::invalid_argument("missing argument for parameter '" + p->name + "'");
  return it->second;
}

std::vector<Predicate> bind_where(std::vector<Predicate> where, const std::map<std::string, Value>& args) {
  for (auto& p : where) p.value = bind_operand(p.value, args);
  return where;
}

}  // namespace

void check_template(TransactionTemplate& t, const Schema& schema) {
  for (auto& stmt : t.body) {
    const TableDef* table = schema.find(table_of(stmt));
    if (table == nullptr) {
      throw SchemaError("transaction '" + t.name + "': unknown table '" + table_of(stmt) + "'");
    }
    std::visit(
        [&](auto& q) {
          using S = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<S, SelectStmt>) {
            if (q.columns.size() == 1 && q.columns[0] == "*") q.columns = table->columns;
            for (const auto& c : q.columns) require_column(*table, c, t.name);
            check_where(*table, q.where, t.name);
          } else if constexpr (std::is_same_v<S, UpdateStmt>) {
            for (const auto& s : q.sets) {
              require_column(*table, s.column, t.name);
              if (table->is_key(s.column)) {
                throw SchemaError("transaction '" + t.name + "': primary-key column '" + s.column +
                                  "' cannot be updated");
              }
              if (s.base_column) require_column(*table, *s.base_column, t.name);
            }
            check_where(*table, q.where, t.name);
          } else if constexpr (std::is_same_v<S, InsertStmt>) {
            if (q.columns.size() != q.values.size()) {
              throw SchemaError("transaction '" + t.name + "': INSERT column/value count mismatch");
            }
            for (const auto& c : q.columns) require_column(*table, c, t.name);
            for (const auto& k : table->key) {
              if (std::find(q.columns.begin(), q.columns.end(), k) == q.columns.end()) {
                throw SchemaError("transaction '" + t.name + "': INSERT must bind key column '" + k + "'");
              }
            }
          } else {
            check_where(*table, q.where, t.name);
          }
        },
        stmt);
  }
}

Conjunction where_condition(const std::string& table, const std::vector<Predicate>& where) {
  Conjunction c;
  for (const auto& p : where) {
    if (p.op == CmpOp::Eq) {
      c.atoms.emplace_back(EqAtom{Attribute{table, p.column}, operand_term(p.value)});
    } else {
      std::string value = std::holds_alternative<ParamRef>(p.value) ? std::get<ParamRef>(p.value).name
                                                                     : to_sql_literal(std::get<Value>(p.value));
      c.atoms.emplace_back(OpaqueAtom{table + "." + p.column + " " + to_string(p.op) + " " + value});
    }
  }
  return c;
}

TransactionTemplate derive_access_sets(TransactionTemplate t, const Schema& schema) {
  check_template(t, schema);
  t.read_set.clear();
  t.write_set.clear();
  for (std::size_t i = 0; i < t.body.size(); ++i) {
    const Statement& stmt = t.body[i];
    const TableDef& table = schema.table(table_of(stmt));
    AccessEntry e;
    e.statement = i;
    std::visit(
        [&](const auto& q) {
          using S = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<S, SelectStmt>) {
            e.attributes = attributes_of(q.table, q.columns);
            e.condition = ConditionDNF::of(where_condition(q.table, q.where));
            t.read_set.push_back(std::move(e));
          } else if constexpr (std::is_same_v<S, UpdateStmt>) {
            std::vector<std::string> cols;
            for (const auto& s : q.sets) cols.push_back(s.column);
            e.attributes = attributes_of(q.table, cols);
            e.condition = ConditionDNF::of(where_condition(q.table, q.where));
            t.write_set.push_back(std::move(e));
          } else if constexpr (std::is_same_v<S, InsertStmt>) {
            e.attributes = attributes_of(q.table, table.columns);
            Conjunction c;
            for (std::size_t k = 0; k < q.columns.size(); ++k) {
              c.atoms.emplace_back(EqAtom{Attribute{q.table, q.columns[k]}, operand_term(q.values[k])});
            }
            e.condition = ConditionDNF::of(std::move(c));
            t.write_set.push_back(std::move(e));
          } else {
            e.attributes = attributes_of(q.table, table.columns);
            e.condition = ConditionDNF::of(where_condition(q.table, q.where));
            t.write_set.push_back(std::move(e));
          }
        },
        stmt);
  }
  return t;
}

Statement bind(const Statement& s, const std::map<std::string, Value>& args) {
  return std::visit(
      [&](const auto& q) -> Statement {
        using S = std::decay_t<decltype(q)>;
        S out = q;
        if constexpr (std::is_same_v<S, SelectStmt> || std::is_same_v<S, DeleteStmt>) {
          out.where = bind_where(q.where, args);
        } else if constexpr (std::is_same_v<S, UpdateStmt>) {
          for (auto& c : out.sets) c.value = bind_operand(c.value, args);
          out.where = bind_where(q.where, args);
        } else {
          for (auto& v : out.values) v = bind_operand(v, args);
        }
        return out;
      },
      s);
}

}  // namespace opart
