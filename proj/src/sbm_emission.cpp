#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"

namespace tradesbm::sbm {
namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

double transform_weight(double weight) {
  if (!(weight > 0.0)) throw InputError("tie weight must be positive, got " + std::to_string(weight));
  return std::log(weight);
}

double emission_logprob(const BlockModel& model, std::size_t t, std::size_t q, std::size_t l,
                        std::optional<double> weight) {
  const double beta = clamp_prob(model.beta.at(t)(q, l));
  if (!weight) return std::log1p(-beta);
  const double d = transform_weight(*weight) - model.mu.at(t)(q, l);
  return std::log(beta) - 0.5 * std::log(2.0 * std::numbers::pi * model.sigma2) - d * d / (2.0 * model.sigma2);
}

namespace detail {

DyadData make_dyads(const TemporalNetwork& net) {
  net.validate();
  DyadData d;
  d.nodes = net.nodes();
  d.times = net.horizon();
  d.present.resize(d.times);
  d.mask = net.presence;
  d.out.assign(d.times, std::vector<std::vector<Tie>>(d.nodes));
  d.in.assign(d.times, std::vector<std::vector<Tie>>(d.nodes));
  for (std::size_t t = 0; t < d.times; ++t) {
    for (std::size_t i = 0; i < d.nodes; ++i) {
      if (d.mask[t][i]) d.present[t].push_back(static_cast<std::uint32_t>(i));
    }
    const double n = static_cast<double>(d.present[t].size());
    d.ordered_dyads += n * (n - 1.0);
    for (std::uint32_t i : d.present[t]) {
      for (std::uint32_t j : d.present[t]) {
        const double w = net.weight(t, i, j);
        if (i == j || w <= 0.0) continue;
        const double x = transform_weight(w);
        d.out[t][i].push_back({j, x});
        d.in[t][j].push_back({i, x});
      }
    }
  }
  return d;
}

EmissionTables make_tables(const BlockModel& model) {
  const std::size_t Q = static_cast<std::size_t>(model.groups);
  const std::size_t T = model.horizon();
  EmissionTables tab;
  tab.groups = Q;
  tab.log_absent.resize(T * Q * Q);
  tab.log_present.resize(T * Q * Q);
  tab.mu.resize(T * Q * Q);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        const double beta = clamp_prob(model.beta[t](q, l));
        const std::size_t k = tab.idx(t, q, l);
        tab.log_absent[k] = std::log1p(-beta);
        tab.log_present[k] = std::log(beta);
        tab.mu[k] = model.mu[t](q, l);
      }
    }
  }
  tab.inv_two_sigma2 = 1.0 / (2.0 * model.sigma2);
  tab.log_norm = -0.5 * std::log(2.0 * std::numbers::pi * model.sigma2);
  return tab;
}

std::vector<std::vector<double>> group_sums(const DyadData& data, const Marginals& tau) {
  const std::size_t Q = tau.groups();
  std::vector<std::vector<double>> sums(data.times, std::vector<double>(Q, 0.0));
  for (std::size_t t = 0; t < data.times; ++t) {
    for (std::uint32_t i : data.present[t]) {
      const auto row = tau.at(i, t);
      for (std::size_t q = 0; q < Q; ++q) sums[t][q] += row[q];
    }
  }
  return sums;
}

void check_dimensions(const DyadData& data, const BlockModel& model, const VariationalState& state) {
  const auto Q = static_cast<std::size_t>(model.groups);
  const bool ok = state.tau.nodes() == data.nodes && state.tau.times() == data.times && state.tau.groups() == Q &&
                  model.horizon() == data.times && model.alpha.size() == Q && model.pi.rows() == Q &&
                  state.xi.nodes() == data.nodes && state.xi.groups() == Q &&
                  state.xi.transitions() + 1 == std::max<std::size_t>(data.times, 1);
  if (!ok) throw InputError("model, state and network dimensions disagree");
}

}  // namespace detail
}  // namespace tradesbm::sbm
