#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/tiers.hpp"

using namespace tradesbm;
using namespace tradesbm::tiers;

namespace tradesbm::tiers {
void PrintTo(const Transition& x, std::ostream* os) {
  *os << x.country << "@" << x.year << ":" << to_string(x.from) << "->" << to_string(x.to);
}
}  // namespace tradesbm::tiers

namespace {

FlowTable table_of(std::vector<std::tuple<std::string, std::string, Cents>> flows, int years = 1) {
  std::vector<FlowRecord> r;
  for (int y = 0; y < years; ++y) {
    for (const auto& [a, b, v] : flows) r.push_back({a, b, 2010 + y, v, v});
  }
  return make_flow_table(std::move(r));
}

Matrix<int> constant_labels(std::vector<int> per_node, std::size_t times) {
  Matrix<int> m(per_node.size(), times, 0);
  for (std::size_t i = 0; i < per_node.size(); ++i) {
    for (std::size_t t = 0; t < times; ++t) m(i, t) = per_node[i];
  }
  return m;
}

std::vector<int> order(const ClusterRanking& r) {
  std::vector<int> out;
  for (const auto& s : r.ranked) out.push_back(s.cluster);
  return out;
}

ClusterRanking ranking_of(std::vector<std::pair<int, std::size_t>> clusters) {
  ClusterRanking r;
  double strength = 1.0;
  for (auto [id, members] : clusters) r.ranked.push_back({id, strength -= 0.1, members});
  return r;
}

TierAssignment manual(std::vector<std::vector<std::optional<Tier>>> tiers, std::vector<int> years) {
  TierAssignment a;
  a.years = std::move(years);
  for (std::size_t i = 0; i < tiers.size(); ++i) a.universe.push_back("C" + std::to_string(i));
  a.cluster = Matrix<int>(tiers.size(), a.years.size(), 0);
  a.tier = std::move(tiers);
  return a;
}

constexpr auto core = Tier::core;
constexpr auto sp = Tier::semi_periphery;
constexpr auto pa = Tier::periphery;

}  // namespace

TEST(RankClusters, DominantClusterFirst) {
  const auto net = build_network(table_of({{"A", "C", 450}, {"B", "D", 450}, {"C", "A", 50}, {"D", "B", 50}}),
                                 {2010, 2010}, NetworkKind::X);
  const auto r = rank_clusters(constant_labels({2, 2, 1, 1}, 1), 2, net, 2010);
  EXPECT_EQ(order(r), (std::vector<int>{2, 1}));
  EXPECT_NEAR(r.ranked[0].strength, 0.45, 1e-15);
  EXPECT_NEAR(r.ranked[1].strength, 0.05, 1e-15);
  EXPECT_EQ(r.ranked[0].members, 2u);
  EXPECT_TRUE(r.empty.empty());
}

TEST(RankClusters, EqualStrengthOrdersById) {
  const auto net = build_network(table_of({{"A", "B", 100}, {"B", "C", 100}, {"C", "D", 100}, {"D", "A", 100}}),
                                 {2010, 2010}, NetworkKind::X);
  EXPECT_EQ(order(rank_clusters(constant_labels({3, 1, 2, 3}, 1), 4, net, 2010)), (std::vector<int>{1, 2, 3}));
  const auto r = rank_clusters(constant_labels({3, 1, 2, 3}, 1), 4, net, 2010);
  EXPECT_EQ(r.empty, std::vector<int>{4});
  EXPECT_THROW(rank_clusters(constant_labels({3, 1, 2, 5}, 1), 4, net, 2010), InputError);
  EXPECT_THROW(rank_clusters(constant_labels({1, 1, 1, 1}, 1), 1, net, 1999), InputError);
}

TEST(RankClusters, RetainedDegreeMeasure) {
  const auto net = build_network(table_of({{"A", "C", 450}, {"B", "D", 450}, {"C", "A", 50}, {"D", "B", 50}}),
                                 {2010, 2010}, NetworkKind::X);
  // Every node has retained in + out weight of 2, so ids decide.
  const auto r = rank_clusters(constant_labels({2, 2, 1, 1}, 1), 2, net, 2010, StrengthMeasure::retained_degree);
  EXPECT_EQ(order(r), (std::vector<int>{1, 2}));
  EXPECT_EQ(r.ranked[0].strength, 2.0);
}

TEST(RankClusters, ScaleInvariant) {
  const auto spec = fixture::shocked_tiers(2);
  const auto a = synthetic::tiered_flow_table(spec, 3);
  auto scaled = a.table.records;
  for (auto& r : scaled) r.export_value *= 41, r.import_value *= 41;
  const auto na = build_network(a.table, {2000, 2004}, NetworkKind::X);
  const auto nb = build_network(make_flow_table(scaled), {2000, 2004}, NetworkKind::X);
  std::vector<int> blocks;
  for (int b : a.block) blocks.push_back(b + 1);
  const auto labels = constant_labels(blocks, 5);
  for (int year = 2000; year <= 2004; ++year) {
    EXPECT_EQ(order(rank_clusters(labels, 3, na, year)), order(rank_clusters(labels, 3, nb, year)));
  }
}

TEST(AssignTiers, CumulativeWalk) {
  const auto tiers = assign_tiers(ranking_of({{7, 10}, {2, 10}, {4, 10}}), {.core_cut = 0.2, .semi_cut = 0.6});
  EXPECT_EQ(tiers.at(7), core);
  EXPECT_EQ(tiers.at(2), sp);
  EXPECT_EQ(tiers.at(4), pa);
  // Defaults on the 5/10/10 planted layout.
  const auto d = assign_tiers(ranking_of({{1, 5}, {2, 10}, {3, 10}}));
  EXPECT_EQ(d.at(1), core);
  EXPECT_EQ(d.at(2), sp);
  EXPECT_EQ(d.at(3), pa);
}

TEST(AssignTiers, OverridesAndDegenerateCases) {
  TierSpec spec;
  spec.overrides[5] = core;
  const auto t = assign_tiers(ranking_of({{1, 4}, {3, 4}, {5, 4}}), spec);
  EXPECT_EQ(t.at(5), core);
  EXPECT_EQ(t.at(3), sp);
  EXPECT_EQ(assign_tiers(ranking_of({{9, 30}})).at(9), core);

  spec.overrides = {{6, pa}};
  EXPECT_THROW(assign_tiers(ranking_of({{1, 4}}), spec), InputError);
  EXPECT_THROW(assign_tiers(ClusterRanking{}), InputError);
  for (auto [a, b] : {std::pair{0.0, 0.5}, {0.5, 0.5}, {0.6, 0.4}, {0.2, 1.0}}) {
    EXPECT_THROW(assign_tiers(ranking_of({{1, 4}}), {.core_cut = a, .semi_cut = b}), InputError) << a << " " << b;
  }
}

TEST(AssignTiers, InvariantUnderRelabeling) {
  const auto tt = synthetic::tiered_flow_table(fixture::shocked_tiers(3), 8);
  const auto net = build_network(tt.table, {2000, 2004}, NetworkKind::X);
  std::mt19937_64 rng(2);
  std::vector<int> blocks;
  for (int b : tt.block) blocks.push_back(b + 1);
  const auto base = assign_all(constant_labels(blocks, 5), 3, net);
  std::vector<int> perm{1, 2, 3, 4};
  for (int k = 0; k < 5; ++k) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> relabeled;
    for (int b : blocks) relabeled.push_back(perm[b - 1]);
    const auto other = assign_all(constant_labels(relabeled, 5), 4, net);
    EXPECT_EQ(other.tier, base.tier);
  }
}

TEST(Trajectory, AbsentYearsAndUnknownCountry) {
  const auto a = manual({{core, std::nullopt, sp}, {std::nullopt, std::nullopt, std::nullopt}}, {2001, 2002, 2003});
  const auto t = trajectory(a, "C0");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_TRUE(t[0].present);
  EXPECT_FALSE(t[1].present);
  EXPECT_EQ(t[2].tier, sp);
  EXPECT_EQ(t[1].year, 2002);
  for (const auto& p : trajectory(a, "C1")) {
    EXPECT_FALSE(p.present);
    EXPECT_FALSE(p.tier);
  }
  EXPECT_THROW(trajectory(a, "ZZ"), InputError);
}

TEST(TransitionReport, NoChangesAndSingleEvent) {
  EXPECT_TRUE(transition_report(manual({{core, core}, {pa, pa}}, {2001, 2002})).rows.empty());
  const auto r = transition_report(manual({{core, core, core}, {sp, sp, pa}}, {2001, 2002, 2003}));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0], (Transition{"C1", 2003, sp, pa}));
  EXPECT_EQ(r.counts.at({sp, pa}), 1u);
  EXPECT_EQ(r.counts.size(), 1u);
}

TEST(TransitionReport, SpansAbsentYears) {
  const auto r = transition_report(manual({{sp, std::nullopt, pa}, {core, std::nullopt, core}}, {2001, 2002, 2003}));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0], (Transition{"C0", 2003, sp, pa}));
}

TEST(TransitionReport, ConsistentWithTrajectories) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, 3);
  const std::vector<std::optional<Tier>> choices{std::nullopt, core, sp, pa};
  for (int k = 0; k < 100; ++k) {
    std::vector<std::vector<std::optional<Tier>>> tiers(6, std::vector<std::optional<Tier>>(5));
    for (auto& row : tiers) {
      for (auto& x : row) x = choices[pick(rng)];
    }
    const auto a = manual(tiers, {1, 2, 3, 4, 5});
    std::vector<Transition> expected;
    for (const auto& country : a.universe) {
      std::optional<TrajectoryPoint> last;
      for (const auto& p : trajectory(a, country)) {
        if (!p.present) continue;
        if (last && *last->tier != *p.tier) expected.push_back({country, p.year, *last->tier, *p.tier});
        last = p;
      }
    }
    auto rows = transition_report(a).rows;
    auto key = [](const Transition& x) { return std::tie(x.country, x.year); };
    std::sort(rows.begin(), rows.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    std::sort(expected.begin(), expected.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    EXPECT_EQ(rows, expected);
  }
}

TEST(PlantedTiers, OrderAndShockRows) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto tt = synthetic::tiered_flow_table(fixture::shocked_tiers(2), seed);
    const auto net = build_network(tt.table, {2000, 2004}, NetworkKind::X);
    std::vector<int> blocks;
    for (int b : tt.block) blocks.push_back(b + 1);
    const auto labels = constant_labels(blocks, 5);
    for (int year : {2000, 2001}) EXPECT_EQ(order(rank_clusters(labels, 3, net, year)), (std::vector<int>{1, 2, 3}));
    for (int year : {2002, 2003, 2004}) {
      EXPECT_EQ(order(rank_clusters(labels, 3, net, year)), (std::vector<int>{1, 3, 2}));
    }
    std::vector<Transition> expected;
    for (std::size_t i = 0; i < tt.block.size(); ++i) {
      if (tt.block[i] == 1) expected.push_back({net.universe[i], 2002, sp, pa});
      if (tt.block[i] == 2) expected.push_back({net.universe[i], 2002, pa, sp});
    }
    const auto report = transition_report(assign_all(labels, 3, net));
    EXPECT_EQ(report.rows, expected) << "seed " << seed;
    EXPECT_EQ(report.counts.at({sp, pa}), 10u);
  }
}
