#include <sstream>

#include "json.hpp"
#include "opart/trace.hpp"

namespace opart {

using nlohmann::json;

namespace {

constexpr const char* kEventNames[] = {"req",    "class", "exec_begin", "commit",   "token_recv", "apply", "append",
                                       "purge",  "snapshot", "token_pass", "reply", "map",   "final"};

json value_json(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::get<std::string>(v);
}

Value json_value(const json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw TraceFormatError("trace: values must be integers or strings");
}

json event_json(const Event& e) {
  json j;
  j["seq"] = e.seq;
  j["t_us"] = e.t_us;
  j["type"] = to_string(e.type);
  // Fields at their default value are omitted; parsing restores the defaults.
  if (e.server != -1) j["server"] = e.server;
  if (e.op != 0) j["op"] = e.op;
  if (e.client != -1) j["client"] = e.client;
  if (!e.txn.empty()) j["txn"] = e.txn;
  if (!e.args.empty()) {
    json a = json::object();
    for (const auto& [k, v] : e.args) a[k] = value_json(v);
    j["args"] = std::move(a);
  }
  if (!e.op_class.empty()) j["class"] = e.op_class;
  if (e.epoch != 0) j["epoch"] = e.epoch;
  if (e.commit_seq != 0) j["commit_seq"] = e.commit_seq;
  if (e.position != 0) j["position"] = e.position;
  if (e.entries != 0) j["entries"] = e.entries;
  if (e.target != -1) j["target"] = e.target;
  if (e.error) j["error"] = true;
  if (!e.update.empty()) j["update"] = e.update;
  if (!e.written.empty()) {
    json w = json::array();
    for (const auto& k : e.written) {
      json key = json::array();
      for (const auto& v : k.key) key.push_back(value_json(v));
      w.push_back(json::array({k.table, std::move(key)}));
    }
    j["written"] = std::move(w);
  }
  if (!e.ops.empty()) j["ops"] = e.ops;
  if (!e.reply.empty()) j["reply"] = e.reply;
  if (!e.dump.empty()) j["dump"] = e.dump;
  if (!e.digest.empty()) j["digest"] = e.digest;
  return j;
}

Event json_event(const json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.t_us = j.at("t_us").get<std::int64_t>();
  e.type = event_type_from_string(j.at("type").get<std::string>());
  e.server = j.value("server", -1);
  e.op = j.value("op", std::uint64_t{0});
  e.client = j.value("client", -1);
  e.txn = j.value("txn", "");
  if (j.contains("args")) {
    for (const auto& [k, v] : j.at("args").items()) e.args[k] = json_value(v);
  }
  e.op_class = j.value("class", "");
  e.epoch = j.value("epoch", std::uint64_t{0});
  e.commit_seq = j.value("commit_seq", std::uint64_t{0});
  e.position = j.value("position", std::uint64_t{0});
  e.entries = j.value("entries", std::uint64_t{0});
  e.target = j.value("target", -1);
  e.error = j.value("error", false);
  if (j.contains("update")) e.update = j.at("update").get<std::vector<std::string>>();
  if (j.contains("written")) {
    for (const auto& w : j.at("written")) {
      RowKey k;
      k.table = w.at(0).get<std::string>();
      for (const auto& v : w.at(1)) k.key.push_back(json_value(v));
      e.written.push_back(std::move(k));
    }
  }
  if (j.contains("ops")) e.ops = j.at("ops").get<std::vector<std::uint64_t>>();
  e.reply = j.value("reply", "");
  e.dump = j.value("dump", "");
  e.digest = j.value("digest", "");
  return e;
}

}  // namespace

std::string to_string(EventType t) { return kEventNames[static_cast<int>(t)]; }

EventType event_type_from_string(const std::string& s) {
  for (int i = 0; i < static_cast<int>(std::size(kEventNames)); ++i) {
    if (s == kEventNames[i]) return static_cast<EventType>(i);
  }
  throw TraceFormatError("trace: unknown event type '" + s + "'");
}

std::string Trace::to_jsonl() const {
  json h;
  h["format"] = header.format;
  h["servers"] = header.servers;
  h["seed"] = header.seed;
  h["scenario"] = header.scenario;
  h["schema"] = header.schema;
  h["templates"] = header.templates;
  h["initial_dump"] = header.initial_dump;
  json classes = json::array();
  for (const auto& c : header.classes) {
    classes.push_back({{"name", c.name},
                       {"class", to_string(c.op_class)},
                       {"parameters", c.parameters},
                       {"read_only", c.read_only},
                       {"weight", c.weight}});
  }
  h["classes"] = std::move(classes);
  std::string out = h.dump() + "\n";
  for (const auto& e : events) out += event_json(e).dump() + "\n";
  return out;
}

Trace Trace::from_jsonl(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != "opart-trace/1") throw TraceFormatError("trace: expected format opart-trace/1");
        t.header.servers = j.at("servers").get<int>();
        t.header.seed = j.at("seed").get<std::uint64_t>();
        t.header.scenario = j.value("scenario", "");
        t.header.schema = j.at("schema").get<std::string>();
        t.header.templates = j.at("templates").get<std::string>();
        t.header.initial_dump = j.at("initial_dump").get<std::string>();
        for (const auto& c : j.at("classes")) {
          TxnClassification tc;
          tc.name = c.at("name").get<std::string>();
          tc.op_class = op_class_from_string(c.at("class").get<std::string>());
          tc.parameters = c.at("parameters").get<std::vector<std::string>>();
          tc.read_only = c.value("read_only", false);
          tc.weight = c.value("weight", 1.0);
          t.header.classes.push_back(std::move(tc));
        }
        have_header = true;
        continue;
      }
      t.events.push_back(json_event(j));
    }
  } catch (const TraceFormatError&) {
    throw;
  } catch (const std::exception& ex) {
    throw TraceFormatError("trace line " + std::to_string(line_no) + ": " + ex.what());
  }
  if (!have_header) throw TraceFormatError("trace: missing header line");
  return t;
}

}  // namespace opart
