#pragma once

// History trace emitted by the simulator and consumed by the checker.
//
// JSON-lines format "opart-trace/1": the first line is the header object
// {"format", "servers", "seed", "scenario", "schema", "templates",
//  "initial_dump", "classes"}; every further line is one event object with
// "seq", "t_us", "type" and the type-specific fields listed on EventType.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "opart/protocol.hpp"

namespace opart {

enum class EventType {
  Req,        // server, op, client, txn, args: request received
  Class,      // server, op, class: routing decision at the executing server
  ExecBegin,  // server, op, epoch: execution attempt starts
  Commit,     // server, op, class, commit_seq, written, update: operation committed
  TokenRecv,  // server, epoch, entries
  Apply,      // server, op, epoch: foreign update delivered
  Append,     // server, op, epoch, position, update: own global update delivered and appended
  Purge,      // server, op: own entry removed after a full circulation
  Snapshot,   // server, epoch, ops: atomic snapshot Q' taken
  TokenPass,  // server, target, epoch
  Reply,      // server, op, client, class, reply, error
  Map,        // server, op, client, target
  Final,      // server, dump, digest
};

std::string to_string(EventType t);
EventType event_type_from_string(const std::string& s);

struct Event {
  std::uint64_t seq = 0;
  std::int64_t t_us = 0;
  EventType type = EventType::Req;
  int server = -1;
  std::uint64_t op = 0;
  int client = -1;
  std::string txn;
  Args args;
  std::string op_class;
  std::uint64_t epoch = 0;
  std::uint64_t commit_seq = 0;
  std::uint64_t position = 0;
  std::uint64_t entries = 0;
  int target = -1;
  bool error = false;
  std::vector<std::string> update;
  std::vector<RowKey> written;
  std::vector<std::uint64_t> ops;
  std::string reply;
  std::string dump;
  std::string digest;
};

struct TraceHeader {
  std::string format = "opart-trace/1";
  int servers = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string schema;     // schema source text
  std::string templates;  // template source text
  std::string initial_dump;
  std::vector<TxnClassification> classes;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trace {
  TraceHeader header;
  std::vector<Event> events;

  [[nodiscard]] std::string to_jsonl() const;
  /// Throws TraceFormatError on malformed input.
  static Trace from_jsonl(const std::string& text);
};

}  // namespace opart
