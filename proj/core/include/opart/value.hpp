#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace opart {

/// A database value. Integers order before strings.
using Value = std::variant<std::int64_t, std::string>;

using Row = std::vector<Value>;

/// SQL-style literal rendering: integers bare, strings single-quoted with '' escaping.
std::string to_sql_literal(const Value& v);

/// Plain rendering used inside replies and dumps (strings quoted, same as SQL).
inline std::string to_string(const Value& v) { return to_sql_literal(v); }

/// FNV-1a over a type tag and the value bytes. Stable across platforms and runs;
/// this is the routing hash for partitioning parameters.
std::uint64_t stable_hash(const Value& v);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace opart
