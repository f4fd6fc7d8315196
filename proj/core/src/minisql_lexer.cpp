#include "minisql_lexer.hpp"

#include <cctype>
#include <charconv>

#include "opart/minisql.hpp"

namespace opart::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = TokKind::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])) != 0) ++j;
      t.kind = TokKind::Int;
      t.text = std::string(src.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, t.number);
      if (ec != std::errc{}) throw ParseError("integer literal out of range", line, col);
      advance(j - i);
    } else if (c == '\'') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == '\'') {
          if (j + 1 < src.size() && src[j + 1] == '\'') {
            value.push_back('\'');
            j += 2;
            continue;
          }
          closed = true;
          break;
        }
        value.push_back(src[j]);
        ++j;
      }
      if (!closed) throw ParseError("unterminated string literal", line, col);
      t.kind = TokKind::Str;
      t.text = std::move(value);
      advance(j + 1 - i);
    } else {
      static constexpr std::string_view two[] = {"<=", ">=", "<>", "!="};
      std::string_view rest = src.substr(i);
      t.kind = TokKind::Punct;
      for (auto op : two) {
        if (rest.starts_with(op)) t.text = std::string(op);
      }
      if (t.text.empty()) {
        static constexpr std::string_view one = "(),;{}=<>+-*.";
        if (one.find(c) == std::string_view::npos) {
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokKind::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

bool keyword_eq(const Token& t, std::string_view upper_keyword) {
  if (t.kind != TokKind::Ident || t.text.size() != upper_keyword.size()) return false;
  for (std::size_t i = 0; i < t.text.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != upper_keyword[i]) return false;
  }
  return true;
}

}  // namespace opart::detail
