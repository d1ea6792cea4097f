#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/netbuild.hpp"
#include "tradesbm/sbm.hpp"

namespace tradesbm::tiers {

enum class Tier { core, semi_periphery, periphery };

std::string_view to_string(Tier tier);
Tier parse_tier(std::string_view s);

enum class StrengthMeasure {
  trade_share,      // mean share of world pre-threshold flow
  retained_degree,  // mean retained in+out weight
};

struct ClusterScore {
  int cluster = 0;  // 1-based
  double strength = 0.0;
  std::size_t members = 0;
};

struct ClusterRanking {
  int year = 0;
  std::vector<ClusterScore> ranked;  // strongest first; ties by cluster id
  std::vector<int> empty;            // clusters with no present member
};

// Ranks the fitted clusters of one year by the mean strength of their
// present members.
ClusterRanking rank_clusters(const sbm::FitResult& result, const TemporalNetwork& net, int year,
                             StrengthMeasure measure = StrengthMeasure::trade_share);
ClusterRanking rank_clusters(const Matrix<int>& labels, int groups, const TemporalNetwork& net, int year,
                             StrengthMeasure measure = StrengthMeasure::trade_share);

// Cut points on cumulative membership share, walked from the strongest
// cluster down. The defaults are a convention, not an estimate.
struct TierSpec {
  double core_cut = 0.15;
  double semi_cut = 0.55;
  std::map<int, Tier> overrides;
};

std::map<int, Tier> assign_tiers(const ClusterRanking& ranking, const TierSpec& spec = {});

struct TierAssignment {
  std::vector<std::string> universe;
  std::vector<int> years;
  Matrix<int> cluster;                 // nodes x times; 0 where absent
  std::vector<std::vector<std::optional<Tier>>> tier;  // [i][t]
  std::vector<ClusterRanking> rankings;
  TierSpec spec;
};

TierAssignment assign_all(const sbm::FitResult& result, const TemporalNetwork& net, const TierSpec& spec = {},
                          StrengthMeasure measure = StrengthMeasure::trade_share);
TierAssignment assign_all(const Matrix<int>& labels, int groups, const TemporalNetwork& net,
                          const TierSpec& spec = {}, StrengthMeasure measure = StrengthMeasure::trade_share);

struct TrajectoryPoint {
  int year = 0;
  bool present = false;
  int cluster = 0;
  std::optional<Tier> tier;
};

std::vector<TrajectoryPoint> trajectory(const TierAssignment& assignments, const std::string& country);

struct Transition {
  std::string country;
  int year = 0;  // first year in the new tier
  Tier from = Tier::core;
  Tier to = Tier::core;

  bool operator==(const Transition&) const = default;
};

// Tier changes between consecutive present years of each country.
struct TransitionReport {
  std::vector<Transition> rows;
  std::map<std::pair<Tier, Tier>, std::size_t> counts;
};

TransitionReport transition_report(const TierAssignment& assignments);

// Summed retained weight from members of cluster q to members of cluster l.
DenseMatrix cluster_weights(const Matrix<int>& labels, int groups, const TemporalNetwork& net, std::size_t t);

void write_trajectories_csv(const std::filesystem::path& path, const TierAssignment& assignments);
void write_transitions_csv(const std::filesystem::path& path, const TransitionReport& report);
void write_composition_json(const std::filesystem::path& path, const TierAssignment& assignments, int groups);
void write_graphml(const std::filesystem::path& path, const Matrix<int>& labels, int groups,
                   const TemporalNetwork& net);

}  // namespace tradesbm::tiers
