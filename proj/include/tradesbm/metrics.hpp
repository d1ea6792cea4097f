#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tradesbm/netbuild.hpp"

namespace tradesbm::metrics {

// Outgoing ties of one country in one year, split by the cutoff.
struct TieCensus {
  std::string country;
  int year = 0;
  NetworkKind kind = NetworkKind::X;
  std::size_t m = 0;      // ties before thresholding
  std::size_t delta = 0;  // ties below the cutoff
  std::vector<double> retained;
  std::vector<double> removed;
};

TieCensus tie_census(const WeightedNet& net, std::size_t node);
std::vector<TieCensus> tie_census(const WeightedNet& net);

// (m - delta) / m; missing when the country has no ties.
std::optional<double> minor_major_ratio(const TieCensus& census);

using ConcentrationFn = std::function<std::optional<double>(std::span<const double>)>;

// Herfindahl-Hirschman index of weight shares; missing for an empty multiset.
std::optional<double> herfindahl(std::span<const double> weights);
// exp(-H) of the weight shares: the reciprocal Hill number of order one.
// Same range and extremes as the HHI.
std::optional<double> entropy_concentration(std::span<const double> weights);

inline std::optional<double> concentration_index(std::span<const double> weights) { return herfindahl(weights); }

enum class Weighting { unweighted, trade_weighted };

using CountryValues = std::map<std::string, std::optional<double>>;

// Mean over countries with a value. Trade weighting uses `trade` (pre-normalization
// totals); countries absent from `trade` get weight 0.
double world_average(const CountryValues& values, Weighting weighting = Weighting::unweighted,
                     const std::map<std::string, double>* trade = nullptr);

// Percent deviation from the world value; missing when the world value is 0.
std::optional<double> country_deviation(double country_value, double world);

// Year-over-year differences; the first entry and any gap are missing.
std::vector<std::optional<double>> first_differences(std::span<const std::optional<double>> series);

struct MetricRow {
  int year = 0;
  std::string country;
  NetworkKind kind = NetworkKind::X;
  std::string metric;
  std::optional<double> value;
};

// Country rows (tie counts, minor/major ratio and its deviation from the
// world mean, concentration of retained and removed ties, first differences)
// plus "WORLD" rows with the unweighted averages.
std::vector<MetricRow> network_metrics(const TemporalNetwork& net, const ConcentrationFn& concentration = herfindahl);

// year,country,kind,metric,value; missing values are empty fields.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace tradesbm::metrics
