#include <cmath>
#include <limits>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"

namespace tradesbm::sbm {
namespace detail {
namespace {

// x log y with 0 log y = 0.
double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  return x * std::log(y);
}

}  // namespace

double elbo_impl(const DyadData& d, const BlockModel& model, const VariationalState& state) {
  check_dimensions(d, model, state);
  const EmissionTables tab = make_tables(model);
  const Marginals& tau = state.tau;
  const std::size_t Q = tab.groups;

  // Chain prior plus chain entropy, per node.
  double chain = 0.0;
  for (std::size_t i = 0; i < d.nodes; ++i) {
    for (std::size_t q = 0; q < Q; ++q) {
      chain += xlogy(tau(i, 0, q), model.alpha[q]) - xlogy(tau(i, 0, q), tau(i, 0, q));
    }
    for (std::size_t s = 0; s + 1 < d.times; ++s) {
      for (std::size_t q = 0; q < Q; ++q) {
        const double from = tau(i, s, q);
        for (std::size_t l = 0; l < Q; ++l) {
          const double x = state.xi(i, s, q, l);
          if (x == 0.0) continue;
          chain += xlogy(x, model.pi(q, l)) - x * std::log(x / from);
        }
      }
    }
  }

  double emission = 0.0;
  const auto sums = group_sums(d, tau);
  for (std::size_t t = 0; t < d.times; ++t) {
    std::vector<double> self(Q * Q, 0.0);
    for (std::uint32_t i : d.present[t]) {
      const auto r = tau.at(i, t);
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) self[q * Q + l] += r[q] * r[l];
      }
    }
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        const double dyads = std::max(sums[t][q] * sums[t][l] - self[q * Q + l], 0.0);
        emission += dyads * tab.log_absent[tab.idx(t, q, l)];
      }
    }
    for (std::uint32_t i : d.present[t]) {
      const auto ri = tau.at(i, t);
      for (const Tie& tie : d.out[t][i]) {
        const auto rj = tau.at(tie.other, t);
        for (std::size_t q = 0; q < Q; ++q) {
          if (ri[q] == 0.0) continue;
          for (std::size_t l = 0; l < Q; ++l) {
            if (rj[l] != 0.0) emission += ri[q] * rj[l] * tab.present_gain(t, q, l, tie.x);
          }
        }
      }
    }
  }

  const double total = chain + emission;
  if (!std::isfinite(total)) throw NumericError("variational bound is not finite");
  return total;
}

double icl_impl(const DyadData& d, const FitResult& result) {
  const BlockModel& model = result.model;
  const std::size_t Q = static_cast<std::size_t>(model.groups);
  const Matrix<int>& z = result.map_labels;
  const EmissionTables tab = make_tables(model);
  constexpr double kTiny = std::numeric_limits<double>::min();
  auto safe_log = [&](double p) { return std::log(std::max(p, kTiny)); };

  double ll = 0.0;
  for (std::size_t i = 0; i < d.nodes; ++i) {
    ll += safe_log(model.alpha[z(i, 0) - 1]);
    for (std::size_t s = 0; s + 1 < d.times; ++s) ll += safe_log(model.pi(z(i, s) - 1, z(i, s + 1) - 1));
  }
  for (std::size_t t = 0; t < d.times; ++t) {
    // Every present ordered dyad starts as "absent"; ties add their gain.
    std::vector<double> count(Q, 0.0);
    for (std::uint32_t i : d.present[t]) count[z(i, t) - 1] += 1.0;
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        const double dyads = q == l ? count[q] * (count[q] - 1.0) : count[q] * count[l];
        ll += dyads * tab.log_absent[tab.idx(t, q, l)];
      }
    }
    for (std::uint32_t i : d.present[t]) {
      for (const Tie& tie : d.out[t][i]) {
        ll += tab.present_gain(t, z(i, t) - 1, z(tie.other, t) - 1, tie.x);
      }
    }
  }

  const double n = static_cast<double>(d.nodes);
  const double q = static_cast<double>(Q);
  const double horizon = static_cast<double>(d.times);
  double penalty = (q - 1.0) / 2.0 * std::log(n);
  if (d.times > 1) penalty += q * (q - 1.0) / 2.0 * std::log(n * (horizon - 1.0));
  // Time-constant diagonal plus per-time off-diagonal, for beta and mu, plus sigma2.
  const double connectivity = 2.0 * (q + q * (q - 1.0) * horizon) + 1.0;
  if (d.ordered_dyads > 0.0) penalty += connectivity / 2.0 * std::log(d.ordered_dyads);
  return ll - penalty;
}

}  // namespace detail

double elbo(const TemporalNetwork& net, const BlockModel& model, const VariationalState& state) {
  return detail::elbo_impl(detail::make_dyads(net), model, state);
}

double icl(const TemporalNetwork& net, const FitResult& result) {
  return detail::icl_impl(detail::make_dyads(net), result);
}

}  // namespace tradesbm::sbm
