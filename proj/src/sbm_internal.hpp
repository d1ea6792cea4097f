#pragma once

#include <cstdint>
#include <vector>

#include "tradesbm/sbm.hpp"

namespace tradesbm::sbm::detail {

struct Tie {
  std::uint32_t other = 0;
  double x = 0.0;  // transformed weight
};

// Observed dyads restricted to present nodes. Ties with an absent endpoint
// are ignored.
struct DyadData {
  std::size_t nodes = 0;
  std::size_t times = 0;
  std::vector<std::vector<std::uint32_t>> present;  // [t] -> node ids
  std::vector<std::vector<bool>> mask;              // [t][i]
  std::vector<std::vector<std::vector<Tie>>> out;   // [t][i] -> ties i->j
  std::vector<std::vector<std::vector<Tie>>> in;    // [t][i] -> ties j->i
  double ordered_dyads = 0.0;                       // sum_t n_t (n_t - 1)
};

DyadData make_dyads(const TemporalNetwork& net);

// Log-probability lookups for one model, flattened [t][q][l].
struct EmissionTables {
  std::size_t groups = 0;
  std::vector<double> log_absent;   // log(1 - beta)
  std::vector<double> log_present;  // log(beta)
  std::vector<double> mu;
  double inv_two_sigma2 = 0.0;
  double log_norm = 0.0;            // -0.5 log(2 pi sigma2)

  std::size_t idx(std::size_t t, std::size_t q, std::size_t l) const { return (t * groups + q) * groups + l; }

  // Present-tie log-probability minus the absent-tie log-probability.
  double present_gain(std::size_t t, std::size_t q, std::size_t l, double x) const {
    const std::size_t k = idx(t, q, l);
    const double d = x - mu[k];
    return log_present[k] + log_norm - d * d * inv_two_sigma2 - log_absent[k];
  }
};

EmissionTables make_tables(const BlockModel& model);

// Per-time group sums of tau over present nodes: [t][q].
std::vector<std::vector<double>> group_sums(const DyadData& data, const Marginals& tau);

void check_dimensions(const DyadData& data, const BlockModel& model, const VariationalState& state);

struct MStepDiagnostics {
  std::size_t carried_cells = 0;
  bool identity_pi = false;
};

BlockModel m_step_impl(const DyadData& data, const VariationalState& state, const BlockModel* previous,
                       double sigma2_floor, MStepDiagnostics* diag);

VariationalState e_step_impl(const DyadData& data, const BlockModel& model, const VariationalState& state,
                             const EStepOptions& options);

double elbo_impl(const DyadData& data, const BlockModel& model, const VariationalState& state);

double icl_impl(const DyadData& data, const FitResult& result);

FitResult run_em(const DyadData& data, VariationalState state, const BlockModel* previous,
                 const FitOptions& options);

}  // namespace tradesbm::sbm::detail
