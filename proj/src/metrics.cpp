#include "tradesbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "tradesbm/error.hpp"

namespace tradesbm::metrics {

TieCensus tie_census(const WeightedNet& net, std::size_t node) {
  TieCensus c;
  c.country = net.universe.at(node);
  c.year = net.year;
  c.kind = net.kind;
  for (double w : net.weights.row(node)) {
    if (w > 0.0) c.retained.push_back(w);
  }
  for (const auto& r : net.removed.at(node)) c.removed.push_back(r.weight);
  c.delta = c.removed.size();
  c.m = c.delta + c.retained.size();
  return c;
}

std::vector<TieCensus> tie_census(const WeightedNet& net) {
  std::vector<TieCensus> out;
  out.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) out.push_back(tie_census(net, i));
  return out;
}

std::optional<double> minor_major_ratio(const TieCensus& census) {
  if (census.m == 0) return std::nullopt;
  return static_cast<double>(census.m - census.delta) / static_cast<double>(census.m);
}

std::optional<double> herfindahl(std::span<const double> weights) {
  if (weights.empty()) return std::nullopt;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) return std::nullopt;
  double h = 0.0;
  for (double w : weights) h += (w / total) * (w / total);
  return h;
}

std::optional<double> entropy_concentration(std::span<const double> weights) {
  if (weights.empty()) return std::nullopt;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) return std::nullopt;
  double h = 0.0;
  for (double w : weights) {
    const double s = w / total;
    if (s > 0.0) h -= s * std::log(s);
  }
  return std::exp(-h);
}

double world_average(const CountryValues& values, Weighting weighting, const std::map<std::string, double>* trade) {
  if (weighting == Weighting::trade_weighted && trade == nullptr) {
    throw InputError("trade-weighted average needs trade totals");
  }
  double num = 0.0, den = 0.0;
  for (const auto& [country, value] : values) {
    if (!value) continue;
    double w = 1.0;
    if (weighting == Weighting::trade_weighted) {
      auto it = trade->find(country);
      w = it == trade->end() ? 0.0 : it->second;
    }
    num += w * *value;
    den += w;
  }
  if (!(den > 0.0)) throw InputError("world average needs at least one country with a value");
  return num / den;
}

std::optional<double> country_deviation(double country_value, double world) {
  if (world == 0.0) return std::nullopt;
  return 100.0 * (country_value - world) / world;
}

std::vector<std::optional<double>> first_differences(std::span<const std::optional<double>> series) {
  std::vector<std::optional<double>> out(series.size());
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k] && series[k - 1]) out[k] = *series[k] - *series[k - 1];
  }
  return out;
}

std::vector<MetricRow> network_metrics(const TemporalNetwork& net, const ConcentrationFn& concentration) {
  std::vector<MetricRow> rows;
  const std::size_t n = net.nodes();
  std::vector<std::vector<std::optional<double>>> ratio(n, std::vector<std::optional<double>>(net.horizon()));
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    const auto& slice = net.slices[t];
    const int year = net.years[t];
    auto push = [&](const std::string& country, const char* metric, std::optional<double> v) {
      rows.push_back({year, country, net.kind, metric, v});
    };
    const auto census = tie_census(slice);
    CountryValues ratios, hhi_kept, hhi_removed;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = census[i];
      ratio[i][t] = minor_major_ratio(c);
      ratios[c.country] = ratio[i][t];
      hhi_kept[c.country] = concentration(c.retained);
      hhi_removed[c.country] = concentration(c.removed);
    }
    const bool any_ratio = std::any_of(ratios.begin(), ratios.end(), [](const auto& kv) { return kv.second; });
    const std::optional<double> world = any_ratio ? std::optional(world_average(ratios)) : std::nullopt;
    auto world_of = [](const CountryValues& v) -> std::optional<double> {
      for (const auto& kv : v) {
        if (kv.second) return world_average(v);
      }
      return std::nullopt;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = census[i];
      push(c.country, "tie_count", static_cast<double>(c.m));
      push(c.country, "minor_ties", static_cast<double>(c.delta));
      push(c.country, "minor_major_ratio", ratio[i][t]);
      push(c.country, "minor_major_deviation_pct",
           ratio[i][t] && world ? country_deviation(*ratio[i][t], *world) : std::nullopt);
      push(c.country, "concentration_retained", hhi_kept[c.country]);
      push(c.country, "concentration_removed", hhi_removed[c.country]);
    }
    push("WORLD", "minor_major_ratio", world);
    push("WORLD", "concentration_retained", world_of(hhi_kept));
    push("WORLD", "concentration_removed", world_of(hhi_removed));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto diffs = first_differences(ratio[i]);
    for (std::size_t t = 1; t < net.horizon(); ++t) {
      rows.push_back({net.years[t], net.universe[i], net.kind, "minor_major_ratio_diff", diffs[t]});
    }
  }
  return rows;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "year,country,kind,metric,value\n";
  for (const auto& r : rows) {
    out << r.year << ',' << r.country << ',' << to_string(r.kind) << ',' << r.metric << ',';
    if (r.value) out << fmt::format("{:.17g}", *r.value);
    out << '\n';
  }
}

}  // namespace tradesbm::metrics
