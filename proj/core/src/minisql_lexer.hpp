#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace opart::detail {

enum class TokKind { Ident, Int, Str, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;      // identifier/punct text, or decoded string literal
  std::int64_t number = 0;
  int line = 1;
  int column = 1;
};

/// Tokenizes mini-SQL. `--` comments run to end of line.
std::vector<Token> lex(std::string_view src);

bool keyword_eq(const Token& t, std::string_view upper_keyword);

}  // namespace opart::detail
