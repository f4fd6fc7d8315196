#include <map>

#include "opart/sim.hpp"

namespace opart {

SaturationResult find_saturation(const SimConfig& base, double latency_cap_ms, int max_clients_per_site) {
  SimConfig cfg = base;
  cfg.spec.record_trace = false;
  if (!cfg.partition) cfg.partition = partition_workload(cfg.spec);

  std::map<int, SaturationResult> seen;
  auto probe = [&](int clients) -> const SaturationResult& {
    auto it = seen.find(clients);
    if (it != seen.end()) return it->second;
    cfg.spec.clients_per_site = clients;
    MetricsReport m = simulate(cfg).metrics;
    const ClassMetrics* all = m.find("all");
    SaturationResult r{all->throughput, clients, all->mean_ms};
    return seen.emplace(clients, r).first->second;
  };
  auto feasible = [&](const SaturationResult& r) { return r.throughput > 0.0 && r.mean_ms <= latency_cap_ms; };

  // Exponential probe for the first infeasible client count, then bisect.
  int good = 0;
  int bad = max_clients_per_site + 1;
  for (int c = 1; c <= max_clients_per_site; c *= 2) {
    if (feasible(probe(c))) {
      good = c;
    } else {
      bad = c;
      break;
    }
  }
  if (good != 0 && bad == max_clients_per_site + 1 && good != max_clients_per_site) {
    if (feasible(probe(max_clients_per_site))) {
      good = max_clients_per_site;
    } else {
      bad = max_clients_per_site;
    }
  }
  while (bad - good > 1 && good != 0) {
    int mid = good + (bad - good) / 2;
    if (feasible(probe(mid))) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  SaturationResult best;
  for (const auto& [c, r] : seen) {
    if (feasible(r) && r.throughput > best.throughput) best = r;
  }
  return best;
}

}  // namespace opart
