#include <algorithm>
#include <cctype>
#include <sstream>

#include "minisql_lexer.hpp"
#include "opart/minisql.hpp"

namespace opart {

using detail::keyword_eq;
using detail::TokKind;
using detail::Token;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(detail::lex(src)) {}

  bool at_end() const { return peek().kind == TokKind::End; }

  TransactionTemplate parse_txn() {
    expect_keyword("TXN");
    TransactionTemplate t;
    t.name = expect_ident("transaction name");
    expect_punct("(");
    if (!accept_punct(")")) {
      do {
        const Token& tok = peek();
        std::string p = expect_ident("parameter name");
        if (std::find(t.parameters.begin(), t.parameters.end(), p) != t.parameters.end()) {
          throw ParseError("duplicate parameter '" + p + "'", tok.line, tok.column);
        }
        t.parameters.push_back(std::move(p));
      } while (accept_punct(","));
      expect_punct(")");
    }
    if (accept_keyword("WEIGHT")) t.weight = parse_number();
    params_ = &t.parameters;
    expect_punct("{");
    while (!accept_punct("}")) {
      if (at_end()) fail("unterminated transaction body, expected '}'");
      t.body.push_back(parse_statement());
    }
    params_ = nullptr;
    return t;
  }

  Statement parse_statement() {
    const Token& t = peek();
    if (keyword_eq(t, "SELECT")) return parse_select();
    if (keyword_eq(t, "UPDATE")) return parse_update();
    if (keyword_eq(t, "INSERT")) return parse_insert();
    if (keyword_eq(t, "DELETE")) return parse_delete();
    if (keyword_eq(t, "CREATE") || keyword_eq(t, "TRIGGER")) fail("triggers and DDL are not supported");
    fail("expected SELECT, UPDATE, INSERT or DELETE");
  }

  TableDef parse_table_def() {
    expect_keyword("TABLE");
    TableDef def;
    def.name = expect_ident("table name");
    def.columns = parse_name_list("column name");
    expect_keyword("KEY");
    def.key = parse_name_list("key column");
    expect_punct(";");
    return def;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == TokKind::End ? " (at end of input)" : " (near '" + t.text + "')"),
                     t.line, t.column);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept_punct(std::string_view p) {
    if (peek().kind == TokKind::Punct && peek().text == p) {
      next();
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }
  bool accept_keyword(std::string_view kw) {
    if (keyword_eq(peek(), kw)) {
      next();
      return true;
    }
    return false;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected " + std::string(kw));
  }
  static bool reserved(const Token& t) {
    static constexpr std::string_view words[] = {"SELECT", "FROM",  "WHERE", "UPDATE", "SET",  "INSERT",
                                                 "INTO",   "VALUES", "DELETE", "AND",   "OR",   "LIKE",
                                                 "TXN",    "WEIGHT", "TABLE",  "KEY",   "JOIN", "NOT"};
    return std::any_of(std::begin(words), std::end(words), [&](auto w) { return keyword_eq(t, w); });
  }
  std::string expect_ident(const char* what) {
    const Token& t = peek();
    if (t.kind != TokKind::Ident || reserved(t)) fail(std::string("expected ") + what);
    return next().text;
  }
  std::vector<std::string> parse_name_list(const char* what) {
    expect_punct("(");
    std::vector<std::string> out;
    do {
      out.push_back(expect_ident(what));
    } while (accept_punct(","));
    expect_punct(")");
    return out;
  }
  double parse_number() {
    const Token& t = peek();
    if (t.kind != TokKind::Int) fail("expected a number");
    std::string text = next().text;
    if (accept_punct(".")) {
      if (peek().kind != TokKind::Int) fail("expected digits after '.'");
      text += "." + next().text;
    }
    return std::stod(text);
  }

  Operand parse_operand() {
    const Token& t = peek();
    if (t.kind == TokKind::Int) return Value{next().number};
    if (t.kind == TokKind::Str) return Value{next().text};
    if (t.kind == TokKind::Punct && t.text == "-" && peek(1).kind == TokKind::Int) {
      next();
      return Value{-next().number};
    }
    if (t.kind == TokKind::Punct && t.text == "(") fail("nested queries are not supported");
    if (t.kind == TokKind::Ident && !reserved(t)) {
      if (params_ == nullptr || std::find(params_->begin(), params_->end(), t.text) == params_->end()) {
        throw ParseError("reference to undeclared parameter '" + t.text + "'", t.line, t.column);
      }
      return ParamRef{next().text};
    }
    fail("expected a parameter or literal");
  }

  std::vector<Predicate> parse_where() {
    std::vector<Predicate> out;
    if (!accept_keyword("WHERE")) return out;
    do {
      Predicate p;
      p.column = expect_ident("column name");
      const Token& op = peek();
      if (keyword_eq(op, "LIKE")) {
        next();
        p.op = CmpOp::Like;
      } else if (op.kind == TokKind::Punct) {
        static const std::pair<std::string_view, CmpOp> ops[] = {
            {"=", CmpOp::Eq}, {"<>", CmpOp::Ne}, {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},
            {"<=", CmpOp::Le}, {">", CmpOp::Gt}, {">=", CmpOp::Ge}};
        auto it = std::find_if(std::begin(ops), std::end(ops), [&](auto& e) { return e.first == op.text; });
        if (it == std::end(ops)) fail("expected a comparison operator");
        next();
        p.op = it->second;
      } else {
        fail("expected a comparison operator");
      }
      if (peek().kind == TokKind::Punct && peek().text == "(") fail("nested queries are not supported");
      p.value = parse_operand();
      out.push_back(std::move(p));
      if (keyword_eq(peek(), "OR")) fail("OR inside WHERE is not supported; split into separate statements");
    } while (accept_keyword("AND"));
    return out;
  }

  std::string parse_from_table() {
    std::string table = expect_ident("table name");
    if (peek().kind == TokKind::Punct && peek().text == ",") fail("joins are not supported");
    if (keyword_eq(peek(), "JOIN")) fail("joins are not supported");
    return table;
  }

  Statement parse_select() {
    expect_keyword("SELECT");
    SelectStmt s;
    if (accept_punct("*")) {
      s.columns.push_back("*");
    } else {
      do {
        s.columns.push_back(expect_ident("column name"));
      } while (accept_punct(","));
    }
    expect_keyword("FROM");
    s.table = parse_from_table();
    s.where = parse_where();
    expect_punct(";");
    return s;
  }

  Statement parse_update() {
    expect_keyword("UPDATE");
    UpdateStmt s;
    s.table = expect_ident("table name");
    expect_keyword("SET");
    do {
      SetClause c;
      c.column = expect_ident("column name");
      expect_punct("=");
      // `col = base (+|-) operand` when an identifier that is not a parameter
      // is followed by an arithmetic operator.
      const Token& t = peek();
      const Token& after = peek(1);
      bool arith = t.kind == TokKind::Ident && !reserved(t) && after.kind == TokKind::Punct &&
                   (after.text == "+" || after.text == "-");
      if (arith) {
        c.base_column = next().text;
        c.arith = next().text[0];
      }
      c.value = parse_operand();
      s.sets.push_back(std::move(c));
    } while (accept_punct(","));
    s.where = parse_where();
    expect_punct(";");
    return s;
  }

  Statement parse_insert() {
    expect_keyword("INSERT");
    expect_keyword("INTO");
    InsertStmt s;
    s.table = expect_ident("table name");
    s.columns = parse_name_list("column name");
    expect_keyword("VALUES");
    expect_punct("(");
    if (keyword_eq(peek(), "SELECT")) fail("nested queries are not supported");
    do {
      s.values.push_back(parse_operand());
    } while (accept_punct(","));
    expect_punct(")");
    expect_punct(";");
    return s;
  }

  Statement parse_delete() {
    expect_keyword("DELETE");
    expect_keyword("FROM");
    DeleteStmt s;
    s.table = parse_from_table();
    s.where = parse_where();
    expect_punct(";");
    return s;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const std::vector<std::string>* params_ = nullptr;
};

std::string_view strip_header(std::string_view text, std::string_view header, std::size_t& consumed_lines) {
  std::size_t i = 0;
  consumed_lines = 0;
  while (i < text.size()) {
    std::size_t eol = text.find('\n', i);
    std::string_view line = text.substr(i, eol == std::string_view::npos ? std::string_view::npos : eol - i);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())) != 0) line.remove_suffix(1);
    ++consumed_lines;
    if (!line.empty()) {
      if (line != header) {
        throw ParseError("missing or unsupported header; expected '" + std::string(header) + "'",
                         static_cast<int>(consumed_lines), 1);
      }
      return eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    }
    if (eol == std::string_view::npos) break;
    i = eol + 1;
  }
  throw ParseError("empty input; expected header '" + std::string(header) + "'", 1, 1);
}

// Re-raises a parse error with line numbers shifted past the header.
template <typename F>
auto with_line_offset(std::size_t offset, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    std::string msg = e.what();
    auto colon = msg.find(": ");
    throw ParseError(colon == std::string::npos ? msg : msg.substr(colon + 2),
                     e.line() + static_cast<int>(offset), e.column());
  }
}

}  // namespace

TransactionTemplate parse_template(std::string_view source) {
  Parser p(source);
  TransactionTemplate t = p.parse_txn();
  if (!p.at_end()) p.fail("unexpected input after transaction");
  return t;
}

std::vector<TransactionTemplate> parse_template_file(std::string_view text) {
  std::size_t offset = 0;
  std::string_view body = strip_header(text, kTemplatesHeader, offset);
  return with_line_offset(offset, [&] {
    Parser p(body);
    std::vector<TransactionTemplate> out;
    while (!p.at_end()) {
      auto t = p.parse_txn();
      for (const auto& prev : out) {
        if (prev.name == t.name) p.fail("duplicate transaction '" + t.name + "'");
      }
      out.push_back(std::move(t));
    }
    return out;
  });
}

Schema parse_schema(std::string_view text) {
  std::size_t offset = 0;
  std::string_view body = strip_header(text, kSchemaHeader, offset);
  return with_line_offset(offset, [&] {
    Parser p(body);
    Schema s;
    while (!p.at_end()) {
      TableDef def = p.parse_table_def();
      try {
        s.add(std::move(def));
      } catch (const SchemaError& e) {
        p.fail(e.what());
      }
    }
    return s;
  });
}

Statement parse_statement(std::string_view text) {
  Parser p(text);
  Statement s = p.parse_statement();
  if (!p.at_end()) p.fail("unexpected input after statement");
  return s;
}

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Like: return "LIKE";
  }
  return "?";
}

namespace {

std::string operand_sql(const Operand& o) {
  if (const auto* p = std::get_if<ParamRef>(&o)) return p->name;
  return to_sql_literal(std::get<Value>(o));
}

std::string where_sql(const std::vector<Predicate>& where) {
  if (where.empty()) return "";
  std::string out = " WHERE ";
  for (std::size_t i = 0; i < where.size(); ++i) {
    if (i > 0) out += " AND ";
    out += where[i].column + " " + to_string(where[i].op) + " " + operand_sql(where[i].value);
  }
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += xs[i];
  }
  return out;
}

}  // namespace

std::string to_sql(const Statement& s) {
  struct Visitor {
    std::string operator()(const SelectStmt& q) const {
      return "SELECT " + join(q.columns) + " FROM " + q.table + where_sql(q.where) + ";";
    }
    std::string operator()(const UpdateStmt& q) const {
      std::string out = "UPDATE " + q.table + " SET ";
      for (std::size_t i = 0; i < q.sets.size(); ++i) {
        const auto& c = q.sets[i];
        if (i > 0) out += ", ";
        out += c.column + " = ";
        if (c.base_column) out += *c.base_column + " " + std::string(1, c.arith) + " ";
        out += operand_sql(c.value);
      }
      return out + where_sql(q.where) + ";";
    }
    std::string operator()(const InsertStmt& q) const {
      std::vector<std::string> vals;
      for (const auto& v : q.values) vals.push_back(operand_sql(v));
      return "INSERT INTO " + q.table + " (" + join(q.columns) + ") VALUES (" + join(vals) + ");";
    }
    std::string operator()(const DeleteStmt& q) const {
      return "DELETE FROM " + q.table + where_sql(q.where) + ";";
    }
  };
  return std::visit(Visitor{}, s);
}

std::string to_source(const TransactionTemplate& t) {
  std::ostringstream out;
  out << "TXN " << t.name << "(" << join(t.parameters) << ")";
  if (t.weight != 1.0) {
    std::ostringstream w;
    w.precision(17);
    w << t.weight;
    std::string ws = w.str();
    out << " WEIGHT " << ws;
  }
  out << " {\n";
  for (const auto& s : t.body) out << "  " << to_sql(s) << "\n";
  out << "}\n";
  return out.str();
}

std::string to_source(const std::vector<TransactionTemplate>& ts) {
  std::string out(kTemplatesHeader);
  out += "\n";
  for (const auto& t : ts) out += "\n" + to_source(t);
  return out;
}

std::string to_source(const Schema& s) {
  std::string out(kSchemaHeader);
  out += "\n";
  for (const auto& t : s.tables()) {
    out += "TABLE " + t.name + " (" + join(t.columns) + ") KEY (" + join(t.key) + ");\n";
  }
  return out;
}

}  // namespace opart
