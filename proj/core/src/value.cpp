#include "opart/value.hpp"

namespace opart {

std::string to_sql_literal(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    return std::to_string(*i);
  }
  const auto& s = std::get<std::string>(v);
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('\'');
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

// Murmur3 finalizer so that small consecutive keys spread over low bits.
std::uint64_t mix(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

std::uint64_t stable_hash(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    // Little-endian encoding regardless of host byte order.
    char buf[9];
    buf[0] = 'i';
    auto u = static_cast<std::uint64_t>(*i);
    for (int b = 0; b < 8; ++b) buf[1 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    return mix(fnv1a(std::string_view(buf, sizeof buf)));
  }
  const auto& s = std::get<std::string>(v);
  return mix(fnv1a(s, fnv1a("s")));
}

}  // namespace opart
