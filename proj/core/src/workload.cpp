#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "opart/sim.hpp"

namespace opart {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Value json_to_value(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw ConfigError(where + ": values must be integers or strings");
}

ParamSpec parse_param(const json& j, const std::string& where) {
  ParamSpec p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "home_key" || kind == "uniform") {
    p.kind = kind == "home_key" ? ParamSpec::HomeKey : ParamSpec::Uniform;
    auto range = j.at("range").get<std::vector<std::int64_t>>();
    if (range.size() != 2 || range[0] > range[1]) throw ConfigError(where + ": range must be [lo, hi] with lo <= hi");
    p.lo = range[0];
    p.hi = range[1];
  } else if (kind == "choice") {
    p.kind = ParamSpec::Choice;
    for (const auto& v : j.at("values")) p.choices.push_back(json_to_value(v, where));
    if (p.choices.empty()) throw ConfigError(where + ": choice needs at least one value");
  } else {
    throw ConfigError(where + ": unknown parameter kind '" + kind + "'");
  }
  return p;
}

Value expand(const Value& pattern, std::int64_t i) {
  const auto* s = std::get_if<std::string>(&pattern);
  if (s == nullptr) return pattern;
  if (*s == "$i") return i;
  std::string out;
  for (std::size_t k = 0; k < s->size(); ++k) {
    if (s->compare(k, 2, "$i") == 0) {
      out += std::to_string(i);
      ++k;
    } else {
      out.push_back((*s)[k]);
    }
  }
  return out;
}

}  // namespace

std::string to_string(Fault f) {
  switch (f) {
    case Fault::None: return "none";
    case Fault::ExecuteBeforeApply: return "execute_before_apply";
    case Fault::ReverseApply: return "reverse_apply";
  }
  return "?";
}

Fault fault_from_string(const std::string& s) {
  if (s == "none") return Fault::None;
  if (s == "execute_before_apply") return Fault::ExecuteBeforeApply;
  if (s == "reverse_apply") return Fault::ReverseApply;
  throw ConfigError("unknown fault '" + s + "'");
}

WorkloadSpec WorkloadSpec::from_json(const std::string& text, const std::string& base_dir) {
  static const std::set<std::string> kKnown = {
      "format",       "name",          "schema",         "templates",          "populate",
      "mix",          "params",        "weights",        "local_ratio",        "groups",
      "clients_per_site", "clients_at_all_sites", "service_time_ms", "apply_time_ms", "token_min_hold_ms",
      "think_time_ms", "cores",        "duration_ms",    "warmup_ms",          "max_ops",
      "misdirect_prob", "max_retries", "max_params_per_txn", "seed",            "fault",
      "record_trace"};
  WorkloadSpec w;
  try {
    json doc = json::parse(text);
    if (doc.value("format", "") != "opart-workload/1") throw ConfigError("workload: expected format opart-workload/1");
    for (const auto& [k, v] : doc.items()) {
      if (kKnown.count(k) == 0) throw ConfigError("workload: unknown field '" + k + "'");
    }
    std::filesystem::path base(base_dir);
    w.name = doc.value("name", "");
    w.schema_text = read_file(base / doc.at("schema").get<std::string>());
    w.templates_text = read_file(base / doc.at("templates").get<std::string>());
    for (const auto& p : doc.value("populate", json::array())) {
      PopulateSpec ps;
      ps.table = p.at("table").get<std::string>();
      ps.rows = p.at("rows").get<std::int64_t>();
      for (const auto& [col, v] : p.at("columns").items()) ps.columns[col] = json_to_value(v, "populate " + ps.table);
      w.populate.push_back(std::move(ps));
    }
    if (doc.contains("mix")) w.mix = doc.at("mix").get<std::map<std::string, double>>();
    if (doc.contains("weights")) w.weights = doc.at("weights").get<std::map<std::string, double>>();
    if (doc.contains("params")) {
      for (const auto& [txn, ps] : doc.at("params").items()) {
        for (const auto& [name, spec] : ps.items()) w.params[txn][name] = parse_param(spec, "params " + txn + "." + name);
      }
    }
    if (doc.contains("local_ratio")) w.local_ratio = doc.at("local_ratio").get<double>();
    if (doc.contains("groups")) {
      w.local_group = doc.at("groups").value("local", std::vector<std::string>{});
      w.global_group = doc.at("groups").value("global", std::vector<std::string>{});
    }
    w.clients_per_site = doc.value("clients_per_site", w.clients_per_site);
    w.clients_at_all_sites = doc.value("clients_at_all_sites", w.clients_at_all_sites);
    w.service_time_ms = doc.value("service_time_ms", w.service_time_ms);
    w.apply_time_ms = doc.value("apply_time_ms", w.apply_time_ms);
    w.token_min_hold_ms = doc.value("token_min_hold_ms", w.token_min_hold_ms);
    w.think_time_ms = doc.value("think_time_ms", w.think_time_ms);
    w.cores = doc.value("cores", w.cores);
    w.duration_ms = doc.value("duration_ms", w.duration_ms);
    w.warmup_ms = doc.value("warmup_ms", w.warmup_ms);
    w.max_ops = doc.value("max_ops", w.max_ops);
    w.misdirect_prob = doc.value("misdirect_prob", w.misdirect_prob);
    w.max_retries = doc.value("max_retries", w.max_retries);
    w.max_params_per_txn = doc.value("max_params_per_txn", w.max_params_per_txn);
    w.seed = doc.value("seed", w.seed);
    w.fault = fault_from_string(doc.value("fault", std::string("none")));
    w.record_trace = doc.value("record_trace", w.record_trace);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
  w.validate();
  return w;
}

std::map<std::string, double> WorkloadSpec::effective_mix() const {
  if (!local_ratio) return mix;
  std::map<std::string, double> out;
  for (const auto& t : local_group) out[t] += *local_ratio / static_cast<double>(local_group.size());
  for (const auto& t : global_group) out[t] += (1.0 - *local_ratio) / static_cast<double>(global_group.size());
  return out;
}

void WorkloadSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("workload: " + m); };
  if (local_ratio) {
    if (*local_ratio < 0.0 || *local_ratio > 1.0) fail("local_ratio must be within [0, 1]");
    if (local_group.empty() || global_group.empty()) fail("local_ratio requires non-empty groups.local and groups.global");
  }
  auto m = effective_mix();
  if (m.empty()) fail("empty transaction mix");
  double sum = 0.0;
  for (const auto& [t, p] : m) {
    if (p < 0.0 || !std::isfinite(p)) fail("mix probability of '" + t + "' must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail("mix probabilities must sum to 1");
  if (clients_per_site < 0) fail("clients_per_site must be nonnegative");
  if (cores < 1) fail("cores must be at least 1");
  if (service_time_ms < 0 || apply_time_ms < 0 || token_min_hold_ms < 0 || think_time_ms < 0) {
    fail("times must be nonnegative");
  }
  if (duration_ms <= 0) fail("duration_ms must be positive");
  if (warmup_ms < 0 || warmup_ms >= duration_ms) fail("warmup_ms must be within [0, duration_ms)");
  if (misdirect_prob < 0 || misdirect_prob > 1) fail("misdirect_prob must be within [0, 1]");
  if (max_retries < 0) fail("max_retries must be nonnegative");
  if (max_params_per_txn < 1) fail("max_params_per_txn must be at least 1");

  Schema schema = parse_schema(schema_text);
  auto templates = parse_template_file(templates_text);
  std::map<std::string, const TransactionTemplate*> by_name;
  for (const auto& t : templates) by_name[t.name] = &t;
  for (const auto& [t, p] : m) {
    auto it = by_name.find(t);
    if (it == by_name.end()) fail("mix names unknown transaction '" + t + "'");
    for (const auto& param : it->second->parameters) {
      auto ps = params.find(t);
      if (ps == params.end() || ps->second.count(param) == 0) {
        fail("no generator for parameter '" + param + "' of '" + t + "'");
      }
    }
  }
  for (const auto& p : populate) {
    const TableDef& def = schema.table(p.table);
    for (const auto& [c, v] : p.columns) {
      if (def.column_index(c) < 0) fail("populate: unknown column " + p.table + "." + c);
    }
    if (p.rows < 0) fail("populate: negative row count");
  }
}

Database initial_database(const WorkloadSpec& spec) {
  Database db(parse_schema(spec.schema_text));
  for (const auto& p : spec.populate) {
    Table& table = db.table(p.table);
    const TableDef& def = table.def();
    for (std::int64_t i = 0; i < p.rows; ++i) {
      Row row(def.columns.size(), Value{std::int64_t{0}});
      for (const auto& [col, pattern] : p.columns) row[def.column_index(col)] = expand(pattern, i);
      if (!table.insert(std::move(row))) throw ConfigError("populate: duplicate key in " + p.table);
    }
  }
  return db;
}

PartitionResult partition_workload(const WorkloadSpec& spec) {
  Schema schema = parse_schema(spec.schema_text);
  PartitionOptions opts;
  opts.weights = spec.weights;
  opts.optimize.max_params_per_txn = spec.max_params_per_txn;
  return run_partitioning(parse_template_file(spec.templates_text), schema, opts);
}

}  // namespace opart
