#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/trade_ingest.hpp"
#include "tradesbm/types.hpp"

namespace tradesbm {

inline constexpr double kDefaultTieCutoff = 0.05;

struct RemovedTie {
  std::size_t target = 0;
  double weight = 0.0;
};

// One year of one network family. Rows are the sending country; each active
// row sums to 1 before thresholding. `out_total` keeps the raw row sums (cents)
// and `removed` the ties dropped by the cutoff, for the metrics module.
struct WeightedNet {
  DenseMatrix weights;
  int year = 0;
  NetworkKind kind = NetworkKind::X;
  std::vector<std::string> universe;
  std::vector<bool> active;      // positive pre-threshold row sum
  std::vector<bool> traded;      // any flow in or out before thresholding
  std::vector<double> out_total;
  std::vector<std::vector<RemovedTie>> removed;
  double cutoff = 0.0;           // 0 until threshold() runs

  std::size_t size() const { return universe.size(); }
  std::size_t retained_ties() const;
  std::size_t removed_ties() const;
};

FlowMatrix net_exports(const FlowMatrix& exports, const FlowMatrix& imports);

WeightedNet normalize_rows(const FlowMatrix& flows);

// Zeroes every weight strictly below `cutoff`. A cutoff of 0 is the identity.
WeightedNet threshold(const WeightedNet& net, double cutoff = kDefaultTieCutoff);

// Per-year slices over one fixed universe plus a presence mask.
struct TemporalNetwork {
  NetworkKind kind = NetworkKind::X;
  std::vector<std::string> universe;
  std::vector<int> years;
  std::vector<WeightedNet> slices;
  std::vector<std::vector<bool>> presence;  // [t][i]
  double cutoff = kDefaultTieCutoff;
  std::string input_digest;

  std::size_t nodes() const { return universe.size(); }
  std::size_t horizon() const { return years.size(); }
  bool present(std::size_t t, std::size_t i) const { return presence[t][i]; }
  double weight(std::size_t t, std::size_t i, std::size_t j) const { return slices[t].weights(i, j); }
  std::size_t retained_ties() const;
  std::size_t index_of(const std::string& country) const;
  std::size_t time_index(int year) const;

  // Throws InputError if slices disagree on universe, weights leave [0, 1],
  // or the diagonal is nonzero.
  void validate() const;
};

struct YearRange {
  int first = 0;
  int last = 0;
};

struct BuildOptions {
  double cutoff = kDefaultTieCutoff;
  // Nodes that traded before thresholding stay present even with no
  // retained tie.
  bool keep_isolated = false;
};

// Presence rule shared by the builder and deserializer.
std::vector<bool> presence_mask(const WeightedNet& slice, bool keep_isolated);

TemporalNetwork build_network(const FlowTable& table, YearRange years, NetworkKind kind,
                              const BuildOptions& options = {});

std::map<NetworkKind, TemporalNetwork> build_networks(const FlowTable& table, YearRange years,
                                                      const std::set<NetworkKind>& kinds,
                                                      const BuildOptions& options = {});

// Wraps already-thresholded weight slices (synthetic data, deserialized
// artifacts). Presence defaults to "has a tie".
TemporalNetwork make_temporal_network(NetworkKind kind, std::vector<std::string> universe,
                                      std::vector<int> years, const std::vector<DenseMatrix>& weights,
                                      std::vector<std::vector<bool>> presence = {});

}  // namespace tradesbm
