#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scratch.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/metrics.hpp"

using namespace tradesbm;
using namespace tradesbm::metrics;

namespace {

std::map<std::pair<std::string, std::string>, std::optional<double>> by_country_metric(
    const std::vector<MetricRow>& rows, int year) {
  std::map<std::pair<std::string, std::string>, std::optional<double>> out;
  for (const auto& r : rows) {
    if (r.year == year) out[{r.country, r.metric}] = r.value;
  }
  return out;
}

TieCensus census(std::size_t m, std::size_t delta) {
  TieCensus c;
  c.m = m;
  c.delta = delta;
  return c;
}

}  // namespace

TEST(MinorMajorRatio, Examples) {
  EXPECT_EQ(minor_major_ratio(census(20, 5)), 0.75);
  EXPECT_EQ(minor_major_ratio(census(7, 0)), 1.0);
  EXPECT_EQ(minor_major_ratio(census(21, 21)), 0.0);
  EXPECT_FALSE(minor_major_ratio(census(0, 0)).has_value());
}

TEST(Herfindahl, Examples) {
  EXPECT_EQ(herfindahl(std::vector<double>{0.5, 0.5}), 0.5);
  EXPECT_EQ(herfindahl(std::vector<double>{0.37}), 1.0);
  for (int k = 1; k <= 12; ++k) {
    EXPECT_NEAR(*herfindahl(std::vector<double>(static_cast<std::size_t>(k), 0.2)), 1.0 / k, 1e-15);
  }
  EXPECT_FALSE(herfindahl(std::vector<double>{}).has_value());
}

TEST(Herfindahl, PermutationScaleAndMerging) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(2 + k % 9);
    for (auto& x : w) x = u(rng);
    const double h = *herfindahl(w);
    EXPECT_GT(h, 0.0);
    EXPECT_LE(h, 1.0);
    auto shuffled = w;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(*herfindahl(shuffled), h, 1e-15);
    auto scaled = w;
    for (auto& x : scaled) x *= 17.5;
    EXPECT_NEAR(*herfindahl(scaled), h, 1e-15);
    auto merged = w;
    merged[0] += merged.back();
    merged.pop_back();
    EXPECT_GT(*herfindahl(merged), h);
  }
}

TEST(EntropyConcentration, ExtremesAndMerging) {
  EXPECT_NEAR(*entropy_concentration(std::vector<double>{0.5, 0.5}), 0.5, 1e-15);
  EXPECT_EQ(entropy_concentration(std::vector<double>{2.0}), 1.0);
  EXPECT_NEAR(*entropy_concentration(std::vector<double>(8, 1.0)), 0.125, 1e-15);
  EXPECT_FALSE(entropy_concentration(std::vector<double>{}).has_value());
  const std::vector<double> w{0.2, 0.3, 0.5};
  EXPECT_GT(*entropy_concentration(std::vector<double>{0.5, 0.5}), *entropy_concentration(w));
}

TEST(WorldAverage, Examples) {
  const CountryValues v{{"A", 0.5}, {"B", 0.7}, {"C", std::nullopt}};
  EXPECT_NEAR(world_average(v), 0.6, 1e-15);
  EXPECT_EQ(world_average({{"A", 0.42}}), 0.42);
  const std::map<std::string, double> trade{{"A", 1.0}, {"B", 3.0}, {"C", 100.0}};
  EXPECT_NEAR(world_average(v, Weighting::trade_weighted, &trade), 0.65, 1e-15);
  EXPECT_THROW(world_average({{"A", std::nullopt}}), InputError);
  EXPECT_THROW(world_average({}), InputError);
  EXPECT_THROW(world_average(v, Weighting::trade_weighted), InputError);
}

TEST(CountryDeviation, Examples) {
  EXPECT_NEAR(*country_deviation(0.72, 0.60), 20.0, 1e-12);
  EXPECT_EQ(country_deviation(0.6, 0.6), 0.0);
  EXPECT_FALSE(country_deviation(0.3, 0.0).has_value());
}

TEST(FirstDifferences, GapsAreMissing) {
  const std::vector<std::optional<double>> s{0.5, 0.75, std::nullopt, 1.0, 0.25};
  const auto d = first_differences(s);
  ASSERT_EQ(d.size(), 5u);
  EXPECT_FALSE(d[0]);
  EXPECT_EQ(d[1], 0.25);
  EXPECT_FALSE(d[2]);
  EXPECT_FALSE(d[3]);
  EXPECT_EQ(d[4], -0.75);
}

TEST(NetworkMetrics, FiveCountryHandValues) {
  const auto net = build_network(fixture::five_countries(), {2020, 2020}, NetworkKind::X);
  const auto rows = by_country_metric(network_metrics(net), 2020);
  for (const auto& [country, hand] : fixture::five_country_metrics()) {
    SCOPED_TRACE(country);
    EXPECT_EQ(rows.at({country, "tie_count"}), static_cast<double>(hand.m));
    EXPECT_EQ(rows.at({country, "minor_ties"}), static_cast<double>(hand.delta));
    EXPECT_EQ(rows.at({country, "minor_major_ratio"}), hand.ratio);
    const auto dev = rows.at({country, "minor_major_deviation_pct"});
    ASSERT_TRUE(dev.has_value());
    EXPECT_NEAR(*dev, 100.0 * (hand.ratio - fixture::kFiveCountryWorld) / fixture::kFiveCountryWorld, 1e-12);
    const auto kept = rows.at({country, "concentration_retained"});
    ASSERT_TRUE(kept.has_value());
    EXPECT_NEAR(*kept, *hand.hhi_kept, 1e-15);
    const auto removed = rows.at({country, "concentration_removed"});
    ASSERT_EQ(removed.has_value(), hand.hhi_removed.has_value());
    if (removed) EXPECT_NEAR(*removed, *hand.hhi_removed, 1e-15);
  }
  EXPECT_NEAR(*rows.at({"WORLD", "minor_major_ratio"}), fixture::kFiveCountryWorld, 1e-15);
  EXPECT_NEAR(*rows.at({"A", "minor_major_deviation_pct"}), 50.0 / 7.0, 1e-12);
  EXPECT_NEAR(*rows.at({"E", "minor_major_deviation_pct"}), -450.0 / 7.0, 1e-12);
}

TEST(NetworkMetrics, PluggableConcentration) {
  const auto net = build_network(fixture::five_countries(), {2020, 2020}, NetworkKind::X);
  const auto rows = by_country_metric(network_metrics(net, entropy_concentration), 2020);
  EXPECT_NEAR(*rows.at({"D", "concentration_retained"}), 0.25, 1e-15);
  EXPECT_NEAR(*rows.at({"B", "concentration_retained"}), std::exp(0.6 * std::log(0.6) + 0.4 * std::log(0.4)), 1e-15);
}

TEST(NetworkMetrics, RatioIsScaleInvariant) {
  const auto a = network_metrics(build_network(fixture::five_countries(), {2020, 2020}, NetworkKind::X));
  const auto b = network_metrics(build_network(fixture::five_countries(37), {2020, 2020}, NetworkKind::X));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].metric == "minor_major_ratio" || a[k].metric == "tie_count" || a[k].metric == "minor_ties") {
      EXPECT_EQ(a[k].value, b[k].value) << a[k].country << " " << a[k].metric;
    }
  }
}

TEST(NetworkMetrics, CensusReconcilesWithRemovedTies) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto table = oracle::random_flow_table(rng, 20, 4);
    const auto net = build_network(table, {table.years.front(), table.years.back()}, NetworkKind::X);
    for (const auto& slice : net.slices) {
      std::size_t delta = 0, kept = 0;
      for (const auto& c : tie_census(slice)) {
        delta += c.delta;
        kept += c.m - c.delta;
        for (double w : c.removed) EXPECT_LT(w, slice.cutoff);
        for (double w : c.retained) EXPECT_GE(w, slice.cutoff);
      }
      EXPECT_EQ(delta, slice.removed_ties());
      EXPECT_EQ(kept, slice.retained_ties());
    }
  }
}

TEST(NetworkMetrics, FirstDifferenceRowsAcrossYears) {
  auto records = fixture::five_countries().records;
  for (auto r : fixture::five_countries().records) {
    r.year = 2021;
    // In 2021 A's small tie grows past the cutoff.
    if (r.reporter == "A" && r.partner == "E") r.export_value = r.import_value = 10;
    records.push_back(r);
  }
  const auto net = build_network(make_flow_table(records), {2020, 2021}, NetworkKind::X);
  const auto rows = by_country_metric(network_metrics(net), 2021);
  EXPECT_EQ(rows.at({"A", "minor_major_ratio"}), 1.0);
  EXPECT_EQ(rows.at({"A", "minor_major_ratio_diff"}), 0.25);
  EXPECT_EQ(rows.at({"B", "minor_major_ratio_diff"}), 0.0);
  EXPECT_FALSE(by_country_metric(network_metrics(net), 2020).contains({"A", "minor_major_ratio_diff"}));
}

TEST(MetricsCsv, MissingValuesAreEmptyFields) {
  ScratchDir dir;
  const auto net = build_network(fixture::five_countries(), {2020, 2020}, NetworkKind::X);
  write_metrics_csv(dir / "m.csv", network_metrics(net));
  std::ifstream in(dir / "m.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("year,country,kind,metric,value\n", 0), 0u);
  EXPECT_NE(text.find("\n2020,B,X,concentration_removed,\n"), std::string::npos);
  EXPECT_NE(text.find("\n2020,A,X,minor_major_ratio,0.75\n"), std::string::npos);
  EXPECT_EQ(text.find(",nan"), std::string::npos);
}
