#include <algorithm>
#include <map>
#include <set>

#include "opart/checker.hpp"

namespace opart {

namespace {

struct Delivery {
  std::uint64_t op = 0;
  std::size_t index = 0;  // position in trace.events
};

struct Broadcast {
  int server = -1;
  std::uint64_t epoch = 0;
  std::size_t index = 0;
  std::size_t order = 0;  // rank among all broadcasts
};

struct Index {
  std::vector<std::vector<Delivery>> deliveries;
  std::map<std::uint64_t, Broadcast> broadcasts;
  std::vector<std::uint64_t> broadcast_order;
  std::map<std::pair<int, std::uint64_t>, std::size_t> snapshots;  // (server, epoch) -> index
  bool drained = false;
};

void validate(const Trace& trace) {
  const int n = trace.header.servers;
  if (n < 1) throw TraceFormatError("trace: header declares no servers");
  std::set<std::pair<int, std::uint64_t>> begun;
  for (const auto& e : trace.events) {
    if (e.server < 0 || e.server >= n) {
      throw TraceFormatError("trace: event " + std::to_string(e.seq) + " names server " + std::to_string(e.server));
    }
    switch (e.type) {
      case EventType::ExecBegin: begun.insert({e.server, e.op}); break;
      case EventType::Commit:
        if (begun.count({e.server, e.op}) == 0) {
          throw TraceFormatError("trace: commit of op " + std::to_string(e.op) + " without exec_begin");
        }
        break;
      case EventType::Apply:
      case EventType::Append:
        if (e.op == 0) throw TraceFormatError("trace: delivery event " + std::to_string(e.seq) + " lacks an op id");
        break;
      default: break;
    }
  }
}

Index build_index(const Trace& trace) {
  validate(trace);
  Index ix;
  ix.deliveries.resize(trace.header.servers);
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const Event& e = trace.events[i];
    switch (e.type) {
      case EventType::Append:
        ix.deliveries[e.server].push_back({e.op, i});
        if (ix.broadcasts.count(e.op) == 0) {
          ix.broadcasts[e.op] = Broadcast{e.server, e.epoch, i, ix.broadcast_order.size()};
          ix.broadcast_order.push_back(e.op);
        }
        break;
      case EventType::Apply: ix.deliveries[e.server].push_back({e.op, i}); break;
      case EventType::Snapshot: ix.snapshots.emplace(std::make_pair(e.server, e.epoch), i); break;
      case EventType::Final: ix.drained = true; break;
      default: break;
    }
  }
  return ix;
}

PropertyResult violation(const char* name, std::string detail, std::vector<std::uint64_t> events) {
  return PropertyResult{name, false, std::move(detail), std::move(events)};
}

std::string op_str(std::uint64_t op) { return "update " + std::to_string(op); }
std::string srv_str(int s) { return "server " + std::to_string(s); }

PropertyResult check_integrity(const Trace& trace, const Index& ix) {
  std::set<std::uint64_t> appended;
  std::vector<std::set<std::uint64_t>> delivered(ix.deliveries.size());
  for (const auto& e : trace.events) {
    if (e.type != EventType::Append && e.type != EventType::Apply) continue;
    if (e.type == EventType::Append) {
      if (!appended.insert(e.op).second) {
        return violation("integrity", op_str(e.op) + " broadcast twice", {trace.events[ix.broadcasts.at(e.op).index].seq, e.seq});
      }
    } else if (appended.count(e.op) == 0) {
      return violation("integrity", srv_str(e.server) + " delivers " + op_str(e.op) + " that was never broadcast before",
                       {e.seq});
    }
    if (!delivered[e.server].insert(e.op).second) {
      return violation("integrity", srv_str(e.server) + " delivers " + op_str(e.op) + " twice", {e.seq});
    }
  }
  return PropertyResult{"integrity", true, "", {}};
}

// If a delivers x before y and b delivers y, then b delivers x before y.
PropertyResult check_total_order(const Trace& trace, const Index& ix) {
  const std::size_t n = ix.deliveries.size();
  for (std::size_t b = 0; b < n; ++b) {
    std::map<std::uint64_t, std::size_t> pos_b;
    for (std::size_t i = 0; i < ix.deliveries[b].size(); ++i) pos_b.emplace(ix.deliveries[b][i].op, i);
    for (std::size_t a = 0; a < n; ++a) {
      if (a == b) continue;
      // Scan a's order tracking the latest position in b of anything a
      // delivered so far, or whether some earlier delivery is absent from b.
      bool have_prev = false;
      bool prev_missing = false;
      std::size_t prev_max = 0;
      const Delivery* witness = nullptr;
      for (const auto& d : ix.deliveries[a]) {
        auto it = pos_b.find(d.op);
        if (it != pos_b.end() && have_prev && (prev_missing || prev_max > it->second)) {
          const Delivery& here = ix.deliveries[b][it->second];
          std::string detail = srv_str(static_cast<int>(a)) + " delivers " + op_str(witness->op) + " before " +
                               op_str(d.op) + " but " + srv_str(static_cast<int>(b)) +
                               (prev_missing ? " delivers " + op_str(d.op) + " without " + op_str(witness->op)
                                             : " delivers them in the opposite order");
          return violation("total_order", detail, {trace.events[witness->index].seq, trace.events[here.index].seq});
        }
        if (it == pos_b.end()) {
          if (!prev_missing) witness = &d;
          prev_missing = true;
        } else if (!prev_missing && (!have_prev || it->second > prev_max)) {
          prev_max = it->second;
          witness = &d;
        }
        have_prev = true;
      }
    }
  }
  return PropertyResult{"total_order", true, "", {}};
}

PropertyResult check_agreement(const Trace& trace, const Index& ix) {
  const std::size_t n = ix.deliveries.size();
  std::vector<std::set<std::uint64_t>> sets(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& d : ix.deliveries[s]) sets[s].insert(d.op);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      std::uint64_t only_a = 0;
      std::uint64_t only_b = 0;
      for (auto op : sets[a]) {
        if (sets[b].count(op) == 0) {
          only_a = op;
          break;
        }
      }
      for (auto op : sets[b]) {
        if (sets[a].count(op) == 0) {
          only_b = op;
          break;
        }
      }
      if (only_a != 0 && only_b != 0) {
        return violation("agreement",
                         srv_str(static_cast<int>(a)) + " delivers " + op_str(only_a) + " and " +
                             srv_str(static_cast<int>(b)) + " delivers " + op_str(only_b) + ", neither delivers both",
                         {});
      }
    }
  }
  if (ix.drained) {
    // After the final circulation every server has delivered every broadcast.
    for (std::size_t s = 0; s < n; ++s) {
      for (auto op : ix.broadcast_order) {
        if (sets[s].count(op) == 0) {
          return violation("agreement",
                           srv_str(static_cast<int>(s)) + " never delivers " + op_str(op) + " in a drained run",
                           {trace.events[ix.broadcasts.at(op).index].seq});
        }
      }
    }
  }
  return PropertyResult{"agreement", true, "", {}};
}

PropertyResult check_local_primary_order(const Trace& trace, const Index& ix) {
  // Broadcasts grouped by primary epoch, in broadcast order.
  std::map<std::uint64_t, std::vector<std::uint64_t>> by_epoch;
  for (auto op : ix.broadcast_order) by_epoch[ix.broadcasts.at(op).epoch].push_back(op);
  for (std::size_t s = 0; s < ix.deliveries.size(); ++s) {
    std::map<std::uint64_t, std::size_t> pos;
    for (std::size_t i = 0; i < ix.deliveries[s].size(); ++i) pos.emplace(ix.deliveries[s][i].op, i);
    for (const auto& [epoch, ops] : by_epoch) {
      for (std::size_t j = 1; j < ops.size(); ++j) {
        auto later = pos.find(ops[j]);
        if (later == pos.end()) continue;
        for (std::size_t i = 0; i < j; ++i) {
          auto earlier = pos.find(ops[i]);
          if (earlier == pos.end() || earlier->second > later->second) {
            return violation("local_primary_order",
                             srv_str(static_cast<int>(s)) + " delivers " + op_str(ops[j]) +
                                 (earlier == pos.end() ? " without " : " before ") + op_str(ops[i]) +
                                 ", both broadcast in that order in epoch " + std::to_string(epoch),
                             {trace.events[ix.deliveries[s][later->second].index].seq});
          }
        }
      }
    }
  }
  return PropertyResult{"local_primary_order", true, "", {}};
}

PropertyResult check_global_primary_order(const Trace& trace, const Index& ix) {
  for (std::size_t s = 0; s < ix.deliveries.size(); ++s) {
    std::uint64_t max_epoch = 0;
    const Delivery* witness = nullptr;
    for (const auto& d : ix.deliveries[s]) {
      auto it = ix.broadcasts.find(d.op);
      if (it == ix.broadcasts.end()) continue;
      if (it->second.epoch < max_epoch) {
        return violation("global_primary_order",
                         srv_str(static_cast<int>(s)) + " delivers " + op_str(d.op) + " of epoch " +
                             std::to_string(it->second.epoch) + " after " + op_str(witness->op) + " of epoch " +
                             std::to_string(max_epoch),
                         {trace.events[witness->index].seq, trace.events[d.index].seq});
      }
      if (it->second.epoch > max_epoch) {
        max_epoch = it->second.epoch;
        witness = &d;
      }
    }
  }
  return PropertyResult{"global_primary_order", true, "", {}};
}

PropertyResult check_primary_integrity(const Trace& trace, const Index& ix) {
  // A primary must deliver every update of an earlier epoch before it starts
  // executing in its own epoch (its snapshot, or its first broadcast).
  std::map<std::uint64_t, std::pair<int, std::size_t>> starts;  // epoch -> (server, start index)
  for (auto op : ix.broadcast_order) {
    const Broadcast& b = ix.broadcasts.at(op);
    if (starts.count(b.epoch) != 0) continue;
    auto snap = ix.snapshots.find({b.server, b.epoch});
    std::size_t start = snap != ix.snapshots.end() && snap->second < b.index ? snap->second : b.index;
    starts.emplace(b.epoch, std::make_pair(b.server, start));
  }
  for (const auto& [epoch, where] : starts) {
    auto [server, start] = where;
    std::set<std::uint64_t> before;
    for (const auto& d : ix.deliveries[server]) {
      if (d.index < start) before.insert(d.op);
    }
    for (auto op : ix.broadcast_order) {
      const Broadcast& b = ix.broadcasts.at(op);
      if (b.epoch >= epoch) continue;
      if (before.count(op) == 0) {
        return violation("primary_integrity",
                         srv_str(server) + " starts epoch " + std::to_string(epoch) + " without delivering " +
                             op_str(op) + " of epoch " + std::to_string(b.epoch),
                         {trace.events[start].seq});
      }
    }
  }
  return PropertyResult{"primary_integrity", true, "", {}};
}

}  // namespace

bool PoAbcastVerdict::pass() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.pass; });
}

const PropertyResult& PoAbcastVerdict::get(const std::string& name) const {
  for (const auto& p : properties) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no property '" + name + "'");
}

std::vector<std::vector<std::uint64_t>> delivery_orders(const Trace& trace) {
  Index ix = build_index(trace);
  std::vector<std::vector<std::uint64_t>> out(ix.deliveries.size());
  for (std::size_t s = 0; s < ix.deliveries.size(); ++s) {
    for (const auto& d : ix.deliveries[s]) out[s].push_back(d.op);
  }
  return out;
}

PoAbcastVerdict check_po_abcast(const Trace& trace) {
  Index ix = build_index(trace);
  PoAbcastVerdict v;
  v.properties.push_back(check_integrity(trace, ix));
  v.properties.push_back(check_total_order(trace, ix));
  v.properties.push_back(check_agreement(trace, ix));
  v.properties.push_back(check_local_primary_order(trace, ix));
  v.properties.push_back(check_global_primary_order(trace, ix));
  v.properties.push_back(check_primary_integrity(trace, ix));
  return v;
}

PropertyResult check_common_prefix(const Trace& trace) {
  auto orders = delivery_orders(trace);
  for (std::size_t a = 0; a < orders.size(); ++a) {
    for (std::size_t b = a + 1; b < orders.size(); ++b) {
      std::set<std::uint64_t> in_a(orders[a].begin(), orders[a].end());
      std::size_t common = 0;
      for (auto op : orders[b]) common += in_a.count(op);
      for (std::size_t i = 0; i < common; ++i) {
        if (i >= orders[a].size() || i >= orders[b].size() || orders[a][i] != orders[b][i]) {
          return PropertyResult{"common_prefix",
                                false,
                                "servers " + std::to_string(a) + " and " + std::to_string(b) +
                                    " share " + std::to_string(common) + " updates but diverge at delivery " +
                                    std::to_string(i),
                                {}};
        }
      }
    }
  }
  return PropertyResult{"common_prefix", true, "", {}};
}

PropertyResult check_exactly_once(const Trace& trace) {
  std::map<std::uint64_t, int> replies;
  std::set<std::uint64_t> requested;
  bool drained = false;
  for (const auto& e : trace.events) {
    if (e.type == EventType::Req) requested.insert(e.op);
    if (e.type == EventType::Reply && ++replies[e.op] > 1) {
      return PropertyResult{"exactly_once", false, "op " + std::to_string(e.op) + " answered twice", {e.seq}};
    }
    if (e.type == EventType::Final) drained = true;
  }
  for (const auto& [op, count] : replies) {
    if (requested.count(op) == 0) {
      return PropertyResult{"exactly_once", false, "reply for op " + std::to_string(op) + " that was never requested", {}};
    }
  }
  if (drained) {
    for (auto op : requested) {
      if (replies.count(op) == 0) {
        return PropertyResult{"exactly_once", false, "op " + std::to_string(op) + " never answered", {}};
      }
    }
  }
  return PropertyResult{"exactly_once", true, "", {}};
}

}  // namespace opart
