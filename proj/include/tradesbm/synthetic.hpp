#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/netbuild.hpp"
#include "tradesbm/trade_ingest.hpp"

// Generators with known ground truth, for recovery tests and fixtures.
namespace tradesbm::synthetic {

// Node `node` belongs to `group` (0-based) from time index `time` onward.
struct NodeSwitch {
  std::size_t node = 0;
  std::size_t time = 0;
  int group = 0;
};

struct PlantedSpec {
  std::size_t nodes = 60;
  std::size_t times = 5;
  int groups = 3;
  double p_in = 0.6;
  double p_out = 0.05;
  std::vector<double> mu_in;  // log-weight mean per group; empty = log(0.5) - 0.5 q
  double mu_out = -2.5257286443082556;  // log(0.08)
  double sd = 0.25;
  std::vector<NodeSwitch> switches;
};

struct Planted {
  TemporalNetwork net;
  Matrix<int> labels;  // nodes x times, 1-based; contiguous equal blocks
};

// Directed dynamic SBM draw; weights are exp(Normal) clipped to [0.05, 1].
Planted planted_network(const PlantedSpec& spec, std::uint64_t seed);

// Trade table with strength-ordered blocks: block 0 is the richest. Every
// country trades within its block and exports to block 0.
struct TieredSpec {
  std::vector<std::size_t> block_sizes{5, 10, 10};
  std::vector<double> scales{20.0, 5.0, 2.0};
  int first_year = 2000;
  std::size_t years = 4;
  double p_within = 0.7;
  double p_to_core = 0.8;
  double p_other = 0.03;
  std::optional<int> shock_block;  // exports of this block are scaled...
  std::size_t shock_time = 0;      // ...from this time index on...
  double shock_factor = 0.2;       // ...by this factor
};

struct TieredTable {
  FlowTable table;
  std::vector<int> block;  // per universe index, 0-based
};

TieredTable tiered_flow_table(const TieredSpec& spec, std::uint64_t seed);

}  // namespace tradesbm::synthetic
