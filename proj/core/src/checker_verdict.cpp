#include "json.hpp"
#include "opart/checker.hpp"

namespace opart {

using nlohmann::json;

namespace {

json property_json(const PropertyResult& p) {
  json j{{"name", p.name}, {"pass", p.pass}};
  if (!p.detail.empty()) j["detail"] = p.detail;
  if (!p.events.empty()) j["events"] = p.events;
  return j;
}

}  // namespace

bool CheckReport::pass() const { return po.pass() && common_prefix.pass && exactly_once.pass && serializability.pass; }

std::string CheckReport::to_json() const {
  json props = json::array();
  for (const auto& p : po.properties) props.push_back(property_json(p));
  json serial{{"pass", serializability.pass}};
  if (!serializability.detail.empty()) serial["detail"] = serializability.detail;
  if (serializability.op) serial["op"] = *serializability.op;
  json j{{"format", "opart-verdict/1"},
         {"pass", pass()},
         {"po_abcast", props},
         {"common_prefix", property_json(common_prefix)},
         {"exactly_once", property_json(exactly_once)},
         {"serializability", serial}};
  return j.dump(2) + "\n";
}

CheckReport check_trace(const Trace& trace) {
  CheckReport r;
  r.po = check_po_abcast(trace);
  r.common_prefix = check_common_prefix(trace);
  r.exactly_once = check_exactly_once(trace);
  try {
    r.serializability = replay_and_compare(trace, build_total_order(trace));
  } catch (const OrderingViolation& e) {
    r.serializability = SerialVerdict{false, e.what(), std::nullopt};
  }
  return r;
}

}  // namespace opart
