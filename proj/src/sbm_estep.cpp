#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"

namespace tradesbm::sbm {
namespace detail {
namespace {

// Expected log evidence for node i (times x groups) given everyone else's
// current marginals. Absent times contribute nothing.
void node_log_evidence(const DyadData& d, const EmissionTables& tab, const Marginals& tau,
                       const std::vector<std::vector<double>>& sums, std::size_t i, DenseMatrix& evidence) {
  const std::size_t Q = tab.groups;
  for (std::size_t t = 0; t < d.times; ++t) {
    auto row = evidence.row(t);
    std::fill(row.begin(), row.end(), 0.0);
    if (!d.mask[t][i]) continue;
    const auto own = tau.at(i, t);
    for (std::size_t q = 0; q < Q; ++q) {
      double e = 0.0;
      for (std::size_t l = 0; l < Q; ++l) {
        e += (sums[t][l] - own[l]) * (tab.log_absent[tab.idx(t, q, l)] + tab.log_absent[tab.idx(t, l, q)]);
      }
      row[q] = e;
    }
    for (const Tie& tie : d.out[t][i]) {
      const auto other = tau.at(tie.other, t);
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) {
          if (other[l] != 0.0) row[q] += other[l] * tab.present_gain(t, q, l, tie.x);
        }
      }
    }
    for (const Tie& tie : d.in[t][i]) {
      const auto other = tau.at(tie.other, t);
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) {
          if (other[l] != 0.0) row[q] += other[l] * tab.present_gain(t, l, q, tie.x);
        }
      }
    }
    for (std::size_t q = 0; q < Q; ++q) {
      if (!std::isfinite(row[q])) {
        throw NumericError("non-finite log potential for node " + std::to_string(i) + " at time index " +
                           std::to_string(t));
      }
    }
  }
}

// Recomputes node i's chain posterior from `source` and writes it to `target`.
// Returns the largest change in tau.
double update_node(const DyadData& d, const EmissionTables& tab, const BlockModel& model, const Marginals& source,
                   const std::vector<std::vector<double>>& sums, std::size_t i, VariationalState& target,
                   DenseMatrix& scratch) {
  node_log_evidence(d, tab, source, sums, i, scratch);
  const ChainPosterior post = forward_backward(scratch, model.alpha, model.pi);
  const std::size_t Q = tab.groups;
  double delta = 0.0;
  for (std::size_t t = 0; t < d.times; ++t) {
    for (std::size_t q = 0; q < Q; ++q) {
      delta = std::max(delta, std::abs(post.tau(t, q) - source(i, t, q)));
      target.tau(i, t, q) = post.tau(t, q);
    }
  }
  for (std::size_t s = 0; s + 1 < d.times; ++s) {
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) target.xi(i, s, q, l) = post.xi[s](q, l);
    }
  }
  return delta;
}

double gauss_seidel_sweep(const DyadData& d, const EmissionTables& tab, const BlockModel& model,
                          VariationalState& state) {
  const std::size_t Q = tab.groups;
  auto sums = group_sums(d, state.tau);
  DenseMatrix scratch(d.times, Q);
  double delta = 0.0;
  for (std::size_t i = 0; i < d.nodes; ++i) {
    // Keep the old row to patch the running group sums afterwards.
    std::vector<double> old(d.times * Q);
    for (std::size_t t = 0; t < d.times; ++t) {
      for (std::size_t q = 0; q < Q; ++q) old[t * Q + q] = state.tau(i, t, q);
    }
    delta = std::max(delta, update_node(d, tab, model, state.tau, sums, i, state, scratch));
    for (std::size_t t = 0; t < d.times; ++t) {
      if (!d.mask[t][i]) continue;
      for (std::size_t q = 0; q < Q; ++q) sums[t][q] += state.tau(i, t, q) - old[t * Q + q];
    }
  }
  return delta;
}

double jacobi_sweep(const DyadData& d, const EmissionTables& tab, const BlockModel& model,
                    const VariationalState& source, VariationalState& target, unsigned threads) {
  const auto sums = group_sums(d, source.tau);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(d.nodes)));
  std::vector<double> deltas(threads, 0.0);
  std::vector<std::string> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        const std::size_t lo = d.nodes * w / threads;
        const std::size_t hi = d.nodes * (w + 1) / threads;
        DenseMatrix scratch(d.times, tab.groups);
        try {
          for (std::size_t i = lo; i < hi; ++i) {
            deltas[w] = std::max(deltas[w], update_node(d, tab, model, source.tau, sums, i, target, scratch));
          }
        } catch (const std::exception& e) {
          errors[w] = e.what();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericError(e);
  }
  return *std::max_element(deltas.begin(), deltas.end());
}

}  // namespace

VariationalState e_step_impl(const DyadData& data, const BlockModel& model, const VariationalState& state,
                             const EStepOptions& options) {
  check_dimensions(data, model, state);
  const EmissionTables tab = make_tables(model);
  VariationalState current = state;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double delta = 0.0;
    if (options.schedule == UpdateSchedule::jacobi) {
      VariationalState candidate = current;
      delta = jacobi_sweep(data, tab, model, current, candidate, options.threads);
      if (elbo_impl(data, model, candidate) >= elbo_impl(data, model, current)) {
        current = std::move(candidate);
      } else {
        delta = gauss_seidel_sweep(data, tab, model, current);
      }
    } else {
      delta = gauss_seidel_sweep(data, tab, model, current);
    }
    if (delta < options.tolerance) break;
  }
  return current;
}

}  // namespace detail

VariationalState e_step(const TemporalNetwork& net, const BlockModel& model, const VariationalState& state,
                        const EStepOptions& options) {
  return detail::e_step_impl(detail::make_dyads(net), model, state, options);
}

}  // namespace tradesbm::sbm
