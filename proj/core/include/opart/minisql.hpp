#pragma once

// Mini-SQL transaction templates: schema, statement AST, parser, printer and
// read/write-set derivation.
//
// Template file grammar (keywords case-insensitive, `--` starts a comment):
//
//   file      := "-- opart-templates v1" NEWLINE { template }
//   template  := TXN name "(" [ name { "," name } ] ")" [ WEIGHT number ] "{" { stmt } "}"
//   stmt      := select | update | insert | delete
//   select    := SELECT ( "*" | col { "," col } ) FROM table [ WHERE cond ] ";"
//   update    := UPDATE table SET set { "," set } [ WHERE cond ] ";"
//   set       := col "=" operand | col "=" col ( "+" | "-" ) operand
//   insert    := INSERT INTO table "(" col { "," col } ")" VALUES "(" operand { "," operand } ")" ";"
//   delete    := DELETE FROM table [ WHERE cond ] ";"
//   cond      := pred { AND pred }
//   pred      := col ( "=" | "<>" | "!=" | "<" | "<=" | ">" | ">=" | LIKE ) operand
//   operand   := param | integer | 'string'
//
// Schema file grammar:
//
//   file      := "-- opart-schema v1" NEWLINE { TABLE name "(" col { "," col } ")" KEY "(" col { "," col } ")" ";" }

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "opart/condition.hpp"
#include "opart/value.hpp"

namespace opart {

inline constexpr std::string_view kTemplatesHeader = "-- opart-templates v1";
inline constexpr std::string_view kSchemaHeader = "-- opart-schema v1";

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TableDef {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> key;

  [[nodiscard]] int column_index(std::string_view column) const;
  [[nodiscard]] bool is_key(std::string_view column) const;
  [[nodiscard]] std::vector<int> key_indices() const;
};

class Schema {
 public:
  /// Validates: unique table names, at least one column, key is a non-empty
  /// subset of the columns.
  void add(TableDef table);

  [[nodiscard]] const TableDef* find(std::string_view name) const;
  /// Throws SchemaError for unknown tables.
  [[nodiscard]] const TableDef& table(std::string_view name) const;
  [[nodiscard]] const std::vector<TableDef>& tables() const { return tables_; }

 private:
  std::vector<TableDef> tables_;
};

struct ParamRef {
  std::string name;
  bool operator==(const ParamRef&) const = default;
};

/// A statement operand: an unbound parameter or a literal.
using Operand = std::variant<ParamRef, Value>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge, Like };

struct Predicate {
  std::string column;
  CmpOp op = CmpOp::Eq;
  Operand value;
};

/// `column = value` or `column = base_column (+|-) value`.
struct SetClause {
  std::string column;
  std::optional<std::string> base_column;
  char arith = 0;
  Operand value;
};

struct SelectStmt {
  std::vector<std::string> columns;  // "*" is expanded by check_template
  std::string table;
  std::vector<Predicate> where;
};

struct UpdateStmt {
  std::string table;
  std::vector<SetClause> sets;
  std::vector<Predicate> where;
};

struct InsertStmt {
  std::string table;
  std::vector<std::string> columns;
  std::vector<Operand> values;
};

struct DeleteStmt {
  std::string table;
  std::vector<Predicate> where;
};

using Statement = std::variant<SelectStmt, UpdateStmt, InsertStmt, DeleteStmt>;

[[nodiscard]] bool is_mutating(const Statement& s);
[[nodiscard]] const std::string& table_of(const Statement& s);

/// ⟨A, C⟩: accessed attributes and the row-selection condition.
struct AccessEntry {
  std::vector<Attribute> attributes;  // sorted, unique
  ConditionDNF condition;
  std::size_t statement = 0;          // index into the template body
};

struct TransactionTemplate {
  std::string name;
  std::vector<std::string> parameters;
  std::vector<Statement> body;
  double weight = 1.0;
  std::vector<AccessEntry> read_set;
  std::vector<AccessEntry> write_set;

  [[nodiscard]] bool read_only() const;
  [[nodiscard]] int parameter_index(std::string_view name) const;
};

/// Parses one `TXN` block (no file header).
TransactionTemplate parse_template(std::string_view source);
/// Parses a template file; the first non-blank line must be kTemplatesHeader.
std::vector<TransactionTemplate> parse_template_file(std::string_view text);
Schema parse_schema(std::string_view text);
/// Parses a single standalone statement (no parameters allowed).
Statement parse_statement(std::string_view text);

std::string to_sql(const Statement& s);
std::string to_source(const TransactionTemplate& t);
std::string to_source(const std::vector<TransactionTemplate>& ts);
std::string to_source(const Schema& s);

/// Type-checks the body against the schema and expands `SELECT *`.
/// Throws SchemaError for unknown tables/columns, key updates, arity mismatches.
void check_template(TransactionTemplate& t, const Schema& schema);

/// One AccessEntry per statement; read-only statements go to the read set.
TransactionTemplate derive_access_sets(TransactionTemplate t, const Schema& schema);

/// Substitutes parameter values. Throws std::invalid_argument on missing arguments.
Statement bind(const Statement& s, const std::map<std::string, Value>& args);

/// Converts a WHERE list to a conjunction over this table's attributes and
/// instance-0 parameters.
Conjunction where_condition(const std::string& table, const std::vector<Predicate>& where);

std::string to_string(CmpOp op);

}  // namespace opart
