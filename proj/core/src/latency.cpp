#include <cmath>

#include "json.hpp"
#include "opart/sim.hpp"

namespace opart {

using nlohmann::json;

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection; exact for every n.
  std::uint64_t x = gen_();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = -n % n;
    while (low < threshold) {
      x = gen_();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(gen_());
  return lo + static_cast<std::int64_t>(below(span));
}

double Rng::unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

LatencyMatrix LatencyMatrix::from_json(const std::string& text) {
  LatencyMatrix m;
  try {
    json doc = json::parse(text);
    if (doc.value("format", "") != "opart-latency/1") throw ConfigError("latency file: expected format opart-latency/1");
    std::string kind = doc.value("kind", "rtt");
    if (kind != "rtt" && kind != "one_way") throw ConfigError("latency file: kind must be \"rtt\" or \"one_way\"");
    double scale = kind == "rtt" ? 0.5 : 1.0;
    m.sites = doc.at("sites").get<std::vector<std::string>>();
    double intra = doc.at("intra_site_ms").get<double>();
    auto raw = doc.at("matrix_ms").get<std::vector<std::vector<double>>>();
    m.jitter_ms = doc.value("jitter_ms", 0.0);
    std::size_t n = m.sites.size();
    if (raw.size() != n) throw ConfigError("latency file: matrix_ms must have one row per site");
    m.one_way_ms.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      if (raw[i].size() != n) throw ConfigError("latency file: matrix_ms must be square");
      for (std::size_t j = 0; j < n; ++j) m.one_way_ms[i][j] = (i == j ? intra : raw[i][j]) * scale;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("latency file: ") + e.what());
  }
  m.validate();
  return m;
}

LatencyMatrix LatencyMatrix::single_site(double intra_rtt_ms) {
  LatencyMatrix m;
  m.sites = {"local"};
  m.one_way_ms = {{intra_rtt_ms / 2.0}};
  return m;
}

void LatencyMatrix::validate() const {
  std::size_t n = sites.size();
  if (n == 0) throw ConfigError("latency matrix: no sites");
  if (jitter_ms < 0) throw ConfigError("latency matrix: negative jitter");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = one_way_ms[i][j];
      if (!std::isfinite(v) || v < 0) throw ConfigError("latency matrix: entries must be finite and nonnegative");
      if (v != one_way_ms[j][i]) throw ConfigError("latency matrix: not symmetric at " + sites[i] + "/" + sites[j]);
      if (i != j && (v < one_way_ms[i][i] || v < one_way_ms[j][j])) {
        throw ConfigError("latency matrix: intra-site delay exceeds " + sites[i] + "/" + sites[j]);
      }
    }
  }
}

}  // namespace opart
