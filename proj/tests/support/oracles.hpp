#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/trade_ingest.hpp"

// Reference computations that share no code with the library.
namespace oracle {

using tradesbm::DenseMatrix;

struct ChainMarginals {
  DenseMatrix tau;               // times x groups
  std::vector<DenseMatrix> xi;   // per transition, groups x groups
  double loglik = 0.0;
};

// Sums over all Q^T paths directly in probability space.
ChainMarginals enumerate_paths(const DenseMatrix& log_emissions, std::span<const double> alpha, const DenseMatrix& pi);

// Minimum-cost perfect assignment on a square cost matrix; result[r] is the
// column given to row r.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

// Same, by trying every permutation. Only for small n.
std::vector<int> assignment_by_permutation(const std::vector<std::vector<double>>& cost);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// Relabels `found` to best agree with `truth` (labels 1..q in both).
std::vector<int> match_labels(std::span<const int> truth, std::span<const int> found, int q);

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n);
DenseMatrix random_stochastic(std::mt19937_64& rng, std::size_t n);

// Random bilateral table with mirrored import values.
tradesbm::FlowTable random_flow_table(std::mt19937_64& rng, std::size_t max_countries, std::size_t max_years);

}  // namespace oracle
