#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "opart/checker.hpp"

namespace opart {

namespace {

struct OpInfo {
  std::string txn;
  Args args;
  std::size_t req_index = 0;
  bool committed = false;
  std::size_t commit_index = 0;
  int server = -1;
  OpClass op_class = OpClass::Local;
  std::uint64_t commit_seq = 0;
  std::vector<RowKey> written;
  bool replied = false;
  bool error = false;
  std::string reply;
};

struct History {
  std::map<std::uint64_t, OpInfo> ops;
  std::vector<std::uint64_t> token_order;
  std::vector<std::size_t> append_index;  // event index of each token_order entry
  std::vector<std::vector<std::pair<std::uint64_t, std::size_t>>> deliveries;  // (op, event index)
  std::vector<std::pair<int, std::string>> finals;                             // (server, dump)
};

History collect(const Trace& trace) {
  History h;
  h.deliveries.resize(std::max(trace.header.servers, 0));
  std::set<std::uint64_t> appended;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const Event& e = trace.events[i];
    switch (e.type) {
      case EventType::Req: {
        auto [it, fresh] = h.ops.try_emplace(e.op);
        if (fresh) {
          it->second.txn = e.txn;
          it->second.args = e.args;
          it->second.req_index = i;
        }
        break;
      }
      case EventType::Commit: {
        OpInfo& o = h.ops[e.op];
        o.committed = true;
        o.commit_index = i;
        o.server = e.server;
        o.op_class = op_class_from_string(e.op_class);
        o.commit_seq = e.commit_seq;
        o.written = e.written;
        break;
      }
      case EventType::Reply: {
        OpInfo& o = h.ops[e.op];
        o.replied = true;
        o.error = e.error;
        o.reply = e.reply;
        break;
      }
      case EventType::Append:
        if (appended.insert(e.op).second) {
          h.token_order.push_back(e.op);
          h.append_index.push_back(i);
        }
        h.deliveries.at(e.server).emplace_back(e.op, i);
        break;
      case EventType::Apply: h.deliveries.at(e.server).emplace_back(e.op, i); break;
      case EventType::Final:
        if (digest_of(e.dump) != e.digest) {
          throw TraceFormatError("trace: final digest of server " + std::to_string(e.server) + " does not match its dump");
        }
        h.finals.emplace_back(e.server, e.dump);
        break;
      default: break;
    }
  }
  return h;
}

bool effective(const OpInfo& o) { return o.committed && o.replied && !o.error; }

struct Replayer {
  Schema schema;
  std::map<std::string, TransactionTemplate> templates;

  explicit Replayer(const Trace& trace) : schema(parse_schema(trace.header.schema)) {
    for (auto& t : parse_template_file(trace.header.templates)) {
      std::string name = t.name;
      templates.emplace(name, derive_access_sets(std::move(t), schema));
    }
  }

  [[nodiscard]] Database initial(const Trace& trace) const { return Database::load(schema, trace.header.initial_dump); }

  std::string run(Engine& engine, const std::string& txn, const Args& args) const {
    auto it = templates.find(txn);
    if (it == templates.end()) throw TraceFormatError("trace: unknown transaction '" + txn + "'");
    return execute(engine, bind_operation(it->second, args)).reply;
  }
};

/// Keys each server is not authoritative for: writes of non-replicated
/// operations executed elsewhere.
std::map<int, std::set<RowKey>> foreign_local_writes(const History& h, int servers) {
  std::map<int, std::set<RowKey>> out;
  for (const auto& [id, o] : h.ops) {
    if (!effective(o) || o.op_class == OpClass::Global) continue;
    for (int p = 0; p < servers; ++p) {
      if (p == o.server) continue;
      out[p].insert(o.written.begin(), o.written.end());
    }
  }
  return out;
}

std::optional<std::string> compare_state(const Database& reference, const Database& server_db,
                                         const std::set<RowKey>& excluded) {
  for (const auto& [name, table] : reference.tables()) {
    const Table& other = server_db.table(name);
    std::set<Key> keys;
    for (const auto& [k, row] : table.rows()) keys.insert(k);
    for (const auto& [k, row] : other.rows()) keys.insert(k);
    for (const auto& k : keys) {
      if (excluded.count(RowKey{name, k}) != 0) continue;
      const Row* a = table.find(k);
      const Row* b = other.find(k);
      if ((a == nullptr) != (b == nullptr) || (a != nullptr && *a != *b)) {
        return to_string(RowKey{name, k});
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> compare_finals(const Trace& trace, const History& h, const Replayer& r,
                                          const Database& reference) {
  auto excluded = foreign_local_writes(h, trace.header.servers);
  for (const auto& [server, dump] : h.finals) {
    Database db = Database::load(r.schema, dump);
    if (auto diff = compare_state(reference, db, excluded[server])) {
      return "server " + std::to_string(server) + " final state differs from the serial replay at " + *diff;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<OrderedOp> build_total_order(const Trace& trace) {
  History h = collect(trace);
  std::map<std::uint64_t, std::size_t> token_pos;
  for (std::size_t i = 0; i < h.token_order.size(); ++i) token_pos[h.token_order[i]] = i;

  auto make = [](std::uint64_t id, const OpInfo& o, std::size_t gap) {
    return OrderedOp{id, o.txn, o.args, o.op_class, o.server, o.reply, gap};
  };

  // (gap, class rank, server, per-server order) for non-global operations.
  std::vector<std::pair<std::tuple<std::size_t, int, int, std::uint64_t>, OrderedOp>> rest;
  for (const auto& [id, o] : h.ops) {
    if (!effective(o)) continue;
    if (o.op_class == OpClass::Global) {
      if (token_pos.count(id) == 0) {
        throw OrderingViolation("global op " + std::to_string(id) + " committed but never reached the token");
      }
      continue;
    }
    if (o.op_class == OpClass::Local) {
      const auto& dl = h.deliveries.at(o.server);
      std::size_t k = 0;
      while (k < dl.size() && dl[k].second < o.commit_index) {
        if (k >= h.token_order.size() || dl[k].first != h.token_order[k]) {
          throw OrderingViolation("server " + std::to_string(o.server) + " delivered updates out of token order before op " +
                                  std::to_string(id));
        }
        ++k;
      }
      rest.push_back({{k, 0, o.server, o.commit_seq}, make(id, o, k)});
    } else {
      // Commutatives sit where they were invoked relative to the token order.
      std::size_t k = static_cast<std::size_t>(
          std::lower_bound(h.append_index.begin(), h.append_index.end(), o.req_index) - h.append_index.begin());
      rest.push_back({{k, 1, 0, o.req_index}, make(id, o, k)});
    }
  }
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<OrderedOp> out;
  std::size_t r = 0;
  for (std::size_t g = 0; g <= h.token_order.size(); ++g) {
    while (r < rest.size() && std::get<0>(rest[r].first) == g) out.push_back(rest[r++].second);
    if (g < h.token_order.size()) {
      std::uint64_t id = h.token_order[g];
      auto it = h.ops.find(id);
      if (it == h.ops.end() || !effective(it->second)) {
        throw OrderingViolation("token carries op " + std::to_string(id) + " that never committed and replied");
      }
      out.push_back(make(id, it->second, g));
    }
  }
  return out;
}

SerialVerdict replay_and_compare(const Trace& trace, const std::vector<OrderedOp>& order) {
  History h = collect(trace);
  Replayer r(trace);
  Engine engine(r.initial(trace));
  for (const auto& op : order) {
    std::string got = r.run(engine, op.txn, op.args);
    if (got != op.reply) {
      return SerialVerdict{false,
                           "op " + std::to_string(op.op) + " (" + op.txn + " at server " + std::to_string(op.server) +
                               ") replied \"" + op.reply + "\" but the serial replay yields \"" + got + "\"",
                           op.op};
    }
  }
  if (auto diff = compare_finals(trace, h, r, engine.snapshot())) return SerialVerdict{false, *diff, std::nullopt};
  return SerialVerdict{true, "", std::nullopt};
}

SerialVerdict brute_force_serializability(const Trace& trace, std::size_t limit) {
  History h = collect(trace);
  Replayer r(trace);
  std::map<int, std::vector<std::uint64_t>> chains;
  std::size_t total = 0;
  std::vector<std::pair<std::size_t, std::uint64_t>> by_commit;
  for (const auto& [id, o] : h.ops) {
    if (effective(o)) by_commit.emplace_back(o.commit_index, id);
  }
  std::sort(by_commit.begin(), by_commit.end());
  for (const auto& [idx, id] : by_commit) {
    chains[h.ops.at(id).server].push_back(id);
    ++total;
  }
  if (total > limit) {
    throw InstanceTooLarge("brute-force check supports at most " + std::to_string(limit) + " operations, trace has " +
                           std::to_string(total));
  }
  std::vector<int> servers;
  for (const auto& [s, c] : chains) servers.push_back(s);
  std::map<int, std::size_t> next;
  std::string last_failure = "no interleaving reproduces the recorded replies";

  std::function<bool(const Database&, std::size_t)> search = [&](const Database& db, std::size_t done) {
    if (done == total) {
      if (auto diff = compare_finals(trace, h, r, db)) {
        last_failure = *diff;
        return false;
      }
      return true;
    }
    for (int s : servers) {
      std::size_t& k = next[s];
      if (k >= chains[s].size()) continue;
      std::uint64_t id = chains[s][k];
      const OpInfo& o = h.ops.at(id);
      Engine engine(db);
      if (r.run(engine, o.txn, o.args) != o.reply) continue;
      ++k;
      bool ok = search(engine.snapshot(), done + 1);
      --k;
      if (ok) return true;
    }
    return false;
  };
  if (search(r.initial(trace), 0)) return SerialVerdict{true, "", std::nullopt};
  return SerialVerdict{false, last_failure, std::nullopt};
}

}  // namespace opart
