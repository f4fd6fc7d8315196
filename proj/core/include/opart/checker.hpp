#pragma once

// Offline verifiers over a recorded trace: primary-order atomic broadcast
// properties, the common-prefix lemma and serializability by replay.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opart/trace.hpp"

namespace opart {

struct PropertyResult {
  std::string name;
  bool pass = true;
  std::string detail;
  std::vector<std::uint64_t> events;  // seq numbers of the first violating event(s)
};

/// Property names, in report order.
inline constexpr const char* kPoProperties[] = {"integrity",           "total_order",          "agreement",
                                                "local_primary_order", "global_primary_order", "primary_integrity"};

struct PoAbcastVerdict {
  std::vector<PropertyResult> properties;

  [[nodiscard]] bool pass() const;
  [[nodiscard]] const PropertyResult& get(const std::string& name) const;
};

/// Throws TraceFormatError when the trace is not well formed.
PoAbcastVerdict check_po_abcast(const Trace& trace);

/// Per-server delivery orders, restricted to common updates, share a prefix
/// containing their intersection.
PropertyResult check_common_prefix(const Trace& trace);

/// Every request is answered by exactly one reply (MAP redirects aside).
PropertyResult check_exactly_once(const Trace& trace);

/// Per-server delivery sequence: op ids of appends (own) and applies (foreign).
std::vector<std::vector<std::uint64_t>> delivery_orders(const Trace& trace);

struct OrderedOp {
  std::uint64_t op = 0;
  std::string txn;
  Args args;
  OpClass op_class = OpClass::Local;
  int server = -1;
  std::string reply;
  std::size_t gap = 0;  // number of globals ordered before this operation
};

/// Raised when the ordering constraints of the construction cannot be met.
class OrderingViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Globals in token order, each local after the globals its server had
/// delivered when it committed, commutatives by invocation.
std::vector<OrderedOp> build_total_order(const Trace& trace);

struct SerialVerdict {
  bool pass = true;
  std::string detail;
  std::optional<std::uint64_t> op;  // first divergent operation
};

/// Sequential replay of `order` on one fresh store; replies must match
/// byte for byte and each server's final state must match on the keys it owns.
SerialVerdict replay_and_compare(const Trace& trace, const std::vector<OrderedOp>& order);

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tries every interleaving of the per-server commit orders (at most `limit`
/// replied operations).
SerialVerdict brute_force_serializability(const Trace& trace, std::size_t limit = 8);

struct CheckReport {
  PoAbcastVerdict po;
  PropertyResult common_prefix;
  PropertyResult exactly_once;
  SerialVerdict serializability;

  [[nodiscard]] bool pass() const;
  [[nodiscard]] std::string to_json() const;
};

/// Runs every check. Throws TraceFormatError for malformed traces.
CheckReport check_trace(const Trace& trace);

}  // namespace opart
