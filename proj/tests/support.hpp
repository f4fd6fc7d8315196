#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "opart/sim.hpp"

namespace opart::test {

inline std::string data_path(const std::string& rel) { return std::string(OPART_TEST_DATA_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline WorkloadSpec load_workload(const std::string& rel) {
  std::string path = data_path(rel);
  return WorkloadSpec::from_json(read_text(path), std::filesystem::path(path).parent_path().string());
}

inline LatencyMatrix load_latency(const std::string& rel) { return LatencyMatrix::from_json(read_text(data_path(rel))); }

inline const TxnClassification& class_of(const ClassificationReport& r, const std::string& name) {
  const TxnClassification* c = r.find(name);
  if (c == nullptr) throw std::out_of_range(name);
  return *c;
}

}  // namespace opart::test
