#include <cctype>
#include <charconv>
#include <cstdio>

#include "opart/store.hpp"

namespace opart {

namespace {

constexpr std::string_view kDumpHeader = "-- opart-dump v1";

std::string row_text(const Row& row) {
  std::string out = "(";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_sql_literal(row[i]);
  }
  return out + ")";
}

// Parses "(v, v, ...)" as written by row_text.
Row parse_row(std::string_view s) {
  Row row;
  std::size_t i = 0;
  auto fail = [&] { throw std::invalid_argument("malformed dump row: " + std::string(s)); };
  if (s.empty() || s[0] != '(') fail();
  ++i;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i < s.size() && s[i] == ')') break;
    if (s[i] == '\'') {
      std::string v;
      ++i;
      while (true) {
        if (i >= s.size()) fail();
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            v.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        v.push_back(s[i++]);
      }
      row.emplace_back(std::move(v));
    } else {
      std::size_t j = i;
      if (j < s.size() && s[j] == '-') ++j;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
      std::int64_t n = 0;
      auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, n);
      if (ec != std::errc{} || p != s.data() + j) fail();
      row.emplace_back(n);
      i = j;
    }
    while (i < s.size() && s[i] == ' ') ++i;
    if (i < s.size() && s[i] == ',') ++i;
  }
  return row;
}

}  // namespace

std::string to_string(const RowKey& k) { return k.table + row_text(k.key); }

Table::Table(TableDef def) : def_(std::move(def)), key_idx_(def_.key_indices()) {}

Key Table::key_of(const Row& row) const {
  Key k;
  k.reserve(key_idx_.size());
  for (int i : key_idx_) k.push_back(row[i]);
  return k;
}

const Row* Table::find(const Key& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

bool Table::insert(Row row) {
  Key k = key_of(row);
  return rows_.emplace(std::move(k), std::move(row)).second;
}

void Table::put(Row row) {
  Key k = key_of(row);
  rows_[std::move(k)] = std::move(row);
}

void Table::erase(const Key& key) { rows_.erase(key); }

Database::Database(Schema schema) : schema_(std::move(schema)) {
  for (const auto& t : schema_.tables()) tables_.emplace(t.name, Table(t));
}

Table& Database::table(std::string_view name) {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw SchemaError("unknown table '" + std::string(name) + "'");
  return it->second;
}

const Table& Database::table(std::string_view name) const {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw SchemaError("unknown table '" + std::string(name) + "'");
  return it->second;
}

std::string Database::dump() const {
  std::string out(kDumpHeader);
  out += "\n";
  for (const auto& [name, table] : tables_) {
    out += "TABLE " + name + " " + std::to_string(table.rows().size()) + "\n";
    for (const auto& [key, row] : table.rows()) out += row_text(row) + "\n";
  }
  return out;
}

std::string digest_of(std::string_view dump) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump)));
  return buf;
}

std::string Database::digest() const { return digest_of(dump()); }

Database Database::load(Schema schema, std::string_view dump) {
  Database db(std::move(schema));
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= dump.size()) return std::nullopt;
    std::size_t eol = dump.find('\n', pos);
    std::string_view line = dump.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? dump.size() : eol + 1;
    return line;
  };
  auto header = next_line();
  if (!header || *header != kDumpHeader) throw std::invalid_argument("dump: missing header");
  Table* current = nullptr;
  while (auto line = next_line()) {
    if (line->empty()) continue;
    if (line->starts_with("TABLE ")) {
      std::string_view rest = line->substr(6);
      current = &db.table(rest.substr(0, rest.find(' ')));
      continue;
    }
    if (current == nullptr) throw std::invalid_argument("dump: row before TABLE line");
    Row row = parse_row(*line);
    if (row.size() != current->def().columns.size()) throw std::invalid_argument("dump: row arity mismatch");
    if (!current->insert(std::move(row))) throw std::invalid_argument("dump: duplicate key");
  }
  return db;
}

std::vector<std::string> StateUpdate::to_sql() const {
  std::vector<std::string> out;
  out.reserve(statements.size());
  for (const auto& s : statements) out.push_back(opart::to_sql(s));
  return out;
}

StateUpdate StateUpdate::from_sql(const std::vector<std::string>& sql) {
  StateUpdate u;
  for (const auto& s : sql) u.statements.push_back(parse_statement(s));
  return u;
}

void UpdateQueue::append(std::uint64_t op_id, StateUpdate u) {
  if (u.empty() && !keep_empty_) return;
  std::lock_guard lock(mu_);
  entries_.push_back(Entry{op_id, std::move(u)});
}

std::vector<UpdateQueue::Entry> UpdateQueue::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<UpdateQueue::Entry> UpdateQueue::drain() {
  std::lock_guard lock(mu_);
  std::vector<Entry> out;
  out.swap(entries_);
  return out;
}

std::size_t UpdateQueue::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

bool like_match(std::string_view text, std::string_view pattern) {
  // Iterative wildcard match: '%' any run, '_' any single character.
  std::size_t t = 0;
  std::size_t p = 0;
  std::size_t star = std::string_view::npos;
  std::size_t mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
      ++t;
      ++p;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

bool matches(const TableDef& table, const Row& row, const std::vector<Predicate>& where) {
  for (const auto& pred : where) {
    const Value& lhs = row[table.column_index(pred.column)];
    const Value& rhs = std::get<Value>(pred.value);
    bool ok = false;
    bool same_type = lhs.index() == rhs.index();
    switch (pred.op) {
      case CmpOp::Eq: ok = lhs == rhs; break;
      case CmpOp::Ne: ok = lhs != rhs; break;
      case CmpOp::Lt: ok = same_type && lhs < rhs; break;
      case CmpOp::Le: ok = same_type && lhs <= rhs; break;
      case CmpOp::Gt: ok = same_type && lhs > rhs; break;
      case CmpOp::Ge: ok = same_type && lhs >= rhs; break;
      case CmpOp::Like:
        ok = std::holds_alternative<std::string>(lhs) && std::holds_alternative<std::string>(rhs) &&
             like_match(std::get<std::string>(lhs), std::get<std::string>(rhs));
        break;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace opart
