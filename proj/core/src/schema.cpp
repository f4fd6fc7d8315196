#include <algorithm>

#include "opart/minisql.hpp"

namespace opart {

int TableDef::column_index(std::string_view column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

bool TableDef::is_key(std::string_view column) const {
  return std::find(key.begin(), key.end(), column) != key.end();
}

std::vector<int> TableDef::key_indices() const {
  std::vector<int> out;
  out.reserve(key.size());
  for (const auto& k : key) out.push_back(column_index(k));
  return out;
}

void Schema::add(TableDef table) {
  if (table.name.empty()) throw SchemaError("table name must be non-empty");
  if (find(table.name) != nullptr) throw SchemaError("duplicate table '" + table.name + "'");
  if (table.columns.empty()) throw SchemaError("table '" + table.name + "' has no columns");
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    for (std::size_t j = i + 1; j < table.columns.size(); ++j) {
      if (table.columns[i] == table.columns[j]) {
        throw SchemaError("duplicate column '" + table.columns[i] + "' in table '" + table.name + "'");
      }
    }
  }
  if (table.key.empty()) throw SchemaError("table '" + table.name + "' has no primary key");
  for (const auto& k : table.key) {
    if (table.column_index(k) < 0) {
      throw SchemaError("key column '" + k + "' is not a column of table '" + table.name + "'");
    }
  }
  tables_.push_back(std::move(table));
}

const TableDef* Schema::find(std::string_view name) const {
  auto it = std::find_if(tables_.begin(), tables_.end(), [&](const TableDef& t) { return t.name == name; });
  return it == tables_.end() ? nullptr : &*it;
}

const TableDef& Schema::table(std::string_view name) const {
  const TableDef* t = find(name);
  if (t == nullptr) throw SchemaError("unknown table '" + std::string(name) + "'");
  return *t;
}

bool is_mutating(const Statement& s) { return !std::holds_alternative<SelectStmt>(s); }

const std::string& table_of(const Statement& s) {
  return std::visit([](const auto& q) -> const std::string& { return q.table; }, s);
}

bool TransactionTemplate::read_only() const {
  return std::none_of(body.begin(), body.end(), [](const Statement& s) { return is_mutating(s); });
}

int TransactionTemplate::parameter_index(std::string_view param) const {
  auto it = std::find(parameters.begin(), parameters.end(), param);
  return it == parameters.end() ? -1 : static_cast<int>(it - parameters.begin());
}

}  // namespace opart
