#include "tradesbm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "tradesbm/error.hpp"

namespace tradesbm::synthetic {

Planted planted_network(const PlantedSpec& spec, std::uint64_t seed) {
  if (spec.groups < 1 || spec.nodes < static_cast<std::size_t>(spec.groups) || spec.times == 0) {
    throw InputError("planted_network: invalid dimensions");
  }
  const std::size_t N = spec.nodes, T = spec.times;
  const auto Q = static_cast<std::size_t>(spec.groups);
  std::vector<double> mu_in = spec.mu_in;
  if (mu_in.empty()) {
    for (std::size_t q = 0; q < Q; ++q) mu_in.push_back(std::log(0.5) - 0.5 * static_cast<double>(q));
  }
  if (mu_in.size() != Q) throw InputError("planted_network: one within-group mean per group required");

  Planted p;
  p.labels = Matrix<int>(N, T, 0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t t = 0; t < T; ++t) p.labels(i, t) = static_cast<int>(i * Q / N) + 1;
  }
  for (const auto& s : spec.switches) {
    if (s.node >= N || s.time >= T || s.group < 0 || s.group >= spec.groups) {
      throw InputError("planted_network: switch out of range");
    }
    for (std::size_t t = s.time; t < T; ++t) p.labels(s.node, t) = s.group + 1;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.sd);
  std::vector<DenseMatrix> slices;
  for (std::size_t t = 0; t < T; ++t) {
    DenseMatrix w(N, N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        if (i == j) continue;
        const int q = p.labels(i, t) - 1, l = p.labels(j, t) - 1;
        const double prob = q == l ? spec.p_in : spec.p_out;
        const double mean = q == l ? mu_in[q] : spec.mu_out;
        const double draw = unif(rng);
        const double x = mean + noise(rng);
        if (draw < prob) w(i, j) = std::clamp(std::exp(x), 0.05, 1.0);
      }
    }
    slices.push_back(std::move(w));
  }
  std::vector<std::string> universe;
  std::vector<int> years;
  for (std::size_t i = 0; i < N; ++i) universe.push_back(fmt::format("N{:03d}", i));
  for (std::size_t t = 0; t < T; ++t) years.push_back(2000 + static_cast<int>(t));
  // Every node stays present, isolated or not.
  std::vector<std::vector<bool>> presence(T, std::vector<bool>(N, true));
  p.net = make_temporal_network(NetworkKind::X, std::move(universe), std::move(years), slices, std::move(presence));
  return p;
}

TieredTable tiered_flow_table(const TieredSpec& spec, std::uint64_t seed) {
  if (spec.block_sizes.empty() || spec.block_sizes.size() != spec.scales.size()) {
    throw InputError("tiered_flow_table: one scale per block required");
  }
  TieredTable out;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    for (std::size_t k = 0; k < spec.block_sizes[b]; ++k) out.block.push_back(static_cast<int>(b));
  }
  const std::size_t N = out.block.size();
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < N; ++i) codes.push_back(fmt::format("T{:03d}", i));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<FlowRecord> records;
  for (std::size_t t = 0; t < spec.years; ++t) {
    const int year = spec.first_year + static_cast<int>(t);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        if (i == j) continue;
        const int bi = out.block[i], bj = out.block[j];
        const double p = bi == bj ? spec.p_within : bj == 0 ? spec.p_to_core : spec.p_other;
        const double draw = unif(rng);
        const double size = 0.5 + unif(rng);
        if (draw >= p) continue;
        double value = spec.scales[bi] * size * 1e6;
        if (spec.shock_block && bi == *spec.shock_block && t >= spec.shock_time) value *= spec.shock_factor;
        const auto cents = static_cast<Cents>(std::llround(value * 100.0));
        records.push_back({codes[i], codes[j], year, cents, cents});
      }
    }
  }
  out.table = make_flow_table(std::move(records));
  if (out.table.universe.size() != N) throw InputError("tiered_flow_table: some country never traded");
  return out;
}

}  // namespace tradesbm::synthetic
