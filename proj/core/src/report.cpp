#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "opart/partitioner.hpp"

namespace opart {

using nlohmann::json;

std::string report_to_json(const ClassificationReport& report, const PartitioningArray& p) {
  json doc;
  doc["format"] = "opart-classification/1";
  json txns = json::array();
  for (const auto& t : report.transactions) {
    txns.push_back({{"name", t.name},
                    {"class", to_string(t.op_class)},
                    {"parameters", t.parameters},
                    {"read_only", t.read_only},
                    {"weight", t.weight}});
  }
  doc["transactions"] = std::move(txns);
  json partitioning = json::object();
  for (const auto& [name, params] : p.assignment) partitioning[name] = params;
  doc["partitioning"] = std::move(partitioning);
  json residual = json::array();
  for (const auto& r : report.residual) {
    residual.push_back(
        {{"t", r.first}, {"t2", r.second}, {"kind", to_string(r.kind)}, {"condition", to_string(r.condition)}});
  }
  doc["residual_conflicts"] = std::move(residual);
  auto c = report.counts();
  doc["counts"] = {{"local", c.local},
                   {"global", c.global},
                   {"commutative", c.commutative},
                   {"local_or_global", c.local_or_global},
                   {"read_only", c.read_only},
                   {"total", c.total}};
  doc["cost"] = report.total_cost;
  return doc.dump(2) + "\n";
}

std::string report_to_table(const ClassificationReport& report, const std::string& application) {
  std::ostringstream out;
  auto c = report.counts();
  out << std::left << std::setw(16) << "Application" << std::right << std::setw(4) << "L" << std::setw(4) << "G"
      << std::setw(4) << "C" << std::setw(6) << "L/G" << std::setw(11) << "Read-only" << std::setw(7) << "Total"
      << "\n";
  out << std::left << std::setw(16) << application << std::right << std::setw(4) << c.local << std::setw(4)
      << c.global << std::setw(4) << c.commutative << std::setw(6) << c.local_or_global << std::setw(11)
      << c.read_only << std::setw(7) << c.total << "\n\n";
  out << std::left << std::setw(28) << "Transaction" << std::setw(14) << "Class" << std::setw(10) << "R/O"
      << "Partitioned by\n";
  for (const auto& t : report.transactions) {
    std::string params;
    for (std::size_t i = 0; i < t.parameters.size(); ++i) params += (i ? ", " : "") + t.parameters[i];
    out << std::left << std::setw(28) << t.name << std::setw(14) << to_string(t.op_class) << std::setw(10)
        << (t.read_only ? "yes" : "no") << (params.empty() ? "-" : params) << "\n";
  }
  out << "\nresidual conflicts: " << report.residual.size() << ", cost: " << report.total_cost << "\n";
  return out.str();
}

std::map<std::string, double> parse_weights(const std::string& json_text) {
  json doc = json::parse(json_text);
  if (doc.value("format", "") != "opart-weights/1") {
    throw std::invalid_argument("weights file: expected format \"opart-weights/1\"");
  }
  std::map<std::string, double> out;
  for (const auto& [name, w] : doc.at("weights").items()) {
    double v = w.get<double>();
    if (v < 0) throw std::invalid_argument("weights file: negative weight for '" + name + "'");
    out[name] = v;
  }
  return out;
}

}  // namespace opart
