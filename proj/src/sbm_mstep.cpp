#include <algorithm>
#include <cmath>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/log.hpp"

namespace tradesbm::sbm {
namespace detail {
namespace {

constexpr double kMassEpsilon = 1e-10;

// Expected dyad and tie statistics per (t, q, l).
struct BlockCounts {
  std::vector<DenseMatrix> dyads;     // expected ordered dyads
  std::vector<DenseMatrix> ties;      // expected present ties
  std::vector<DenseMatrix> x_sum;     // expected sum of transformed weights
};

BlockCounts count_blocks(const DyadData& d, const Marginals& tau) {
  const std::size_t Q = tau.groups();
  BlockCounts c;
  const auto sums = group_sums(d, tau);
  for (std::size_t t = 0; t < d.times; ++t) {
    DenseMatrix self(Q, Q, 0.0);
    for (std::uint32_t i : d.present[t]) {
      const auto r = tau.at(i, t);
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) self(q, l) += r[q] * r[l];
      }
    }
    DenseMatrix dy(Q, Q), ti(Q, Q, 0.0), xs(Q, Q, 0.0);
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) dy(q, l) = std::max(sums[t][q] * sums[t][l] - self(q, l), 0.0);
    }
    for (std::uint32_t i : d.present[t]) {
      const auto ri = tau.at(i, t);
      for (const Tie& tie : d.out[t][i]) {
        const auto rj = tau.at(tie.other, t);
        for (std::size_t q = 0; q < Q; ++q) {
          if (ri[q] == 0.0) continue;
          for (std::size_t l = 0; l < Q; ++l) {
            const double m = ri[q] * rj[l];
            ti(q, l) += m;
            xs(q, l) += m * tie.x;
          }
        }
      }
    }
    c.dyads.push_back(std::move(dy));
    c.ties.push_back(std::move(ti));
    c.x_sum.push_back(std::move(xs));
  }
  return c;
}

BlockModel neutral_model(const DyadData& d, std::size_t Q) {
  double ties = 0.0, xs = 0.0, xx = 0.0;
  for (std::size_t t = 0; t < d.times; ++t) {
    for (const auto& list : d.out[t]) {
      for (const Tie& tie : list) {
        ties += 1.0;
        xs += tie.x;
        xx += tie.x * tie.x;
      }
    }
  }
  const double density = d.ordered_dyads > 0.0 ? ties / d.ordered_dyads : 0.5;
  const double mean = ties > 0.0 ? xs / ties : std::log(0.2);
  const double var = ties > 1.0 ? xx / ties - mean * mean : 1.0;
  BlockModel m;
  m.groups = static_cast<int>(Q);
  m.alpha.assign(Q, 1.0 / static_cast<double>(Q));
  m.pi = DenseMatrix(Q, Q, 0.0);
  for (std::size_t q = 0; q < Q; ++q) m.pi(q, q) = 1.0;
  m.beta.assign(d.times, DenseMatrix(Q, Q, std::clamp(density, kProbClamp, 1.0 - kProbClamp)));
  m.mu.assign(d.times, DenseMatrix(Q, Q, mean));
  m.sigma2 = var > 0.0 ? var : 1.0;
  return m;
}

}  // namespace

BlockModel m_step_impl(const DyadData& d, const VariationalState& state, const BlockModel* previous,
                       double sigma2_floor, MStepDiagnostics* diag) {
  const Marginals& tau = state.tau;
  const std::size_t Q = tau.groups();
  const std::size_t N = d.nodes;
  const std::size_t T = d.times;
  if (tau.nodes() != N || tau.times() != T || Q == 0) throw InputError("m_step: state does not match network");
  if (previous != nullptr && (previous->groups != static_cast<int>(Q) || previous->horizon() != T)) {
    throw InputError("m_step: previous model has different dimensions");
  }
  const BlockModel fallback = previous != nullptr ? *previous : neutral_model(d, Q);
  MStepDiagnostics local;
  MStepDiagnostics& dg = diag != nullptr ? *diag : local;

  BlockModel m;
  m.groups = static_cast<int>(Q);

  m.alpha.assign(Q, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t q = 0; q < Q; ++q) m.alpha[q] += tau(i, 0, q);
  }
  for (double& a : m.alpha) a /= static_cast<double>(N);

  m.pi = DenseMatrix(Q, Q, 0.0);
  if (T < 2) {
    for (std::size_t q = 0; q < Q; ++q) m.pi(q, q) = 1.0;
    dg.identity_pi = true;
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t s = 0; s + 1 < T; ++s) {
        for (std::size_t q = 0; q < Q; ++q) {
          for (std::size_t l = 0; l < Q; ++l) m.pi(q, l) += state.xi(i, s, q, l);
        }
      }
    }
    for (std::size_t q = 0; q < Q; ++q) {
      double row = 0.0;
      for (std::size_t l = 0; l < Q; ++l) row += m.pi(q, l);
      if (row <= kMassEpsilon) {
        for (std::size_t l = 0; l < Q; ++l) m.pi(q, l) = fallback.pi(q, l);
        ++dg.carried_cells;
      } else {
        for (std::size_t l = 0; l < Q; ++l) m.pi(q, l) /= row;
      }
    }
  }

  const BlockCounts c = count_blocks(d, tau);
  m.beta.assign(T, DenseMatrix(Q, Q, 0.0));
  m.mu.assign(T, DenseMatrix(Q, Q, 0.0));
  auto clamp_beta = [](double b) { return std::clamp(b, kProbClamp, 1.0 - kProbClamp); };

  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t l = 0; l < Q; ++l) {
      if (q == l) {
        // Within-group parameters are pooled over time.
        double dy = 0.0, ti = 0.0, xs = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          dy += c.dyads[t](q, q);
          ti += c.ties[t](q, q);
          xs += c.x_sum[t](q, q);
        }
        const double beta = dy > kMassEpsilon ? clamp_beta(ti / dy) : fallback.beta[0](q, q);
        const double mu = ti > kMassEpsilon ? xs / ti : fallback.mu[0](q, q);
        dg.carried_cells += (dy > kMassEpsilon ? 0 : 1) + (ti > kMassEpsilon ? 0 : 1);
        for (std::size_t t = 0; t < T; ++t) {
          m.beta[t](q, q) = beta;
          m.mu[t](q, q) = mu;
        }
      } else {
        for (std::size_t t = 0; t < T; ++t) {
          const double dy = c.dyads[t](q, l);
          const double ti = c.ties[t](q, l);
          m.beta[t](q, l) = dy > kMassEpsilon ? clamp_beta(ti / dy) : fallback.beta[t](q, l);
          m.mu[t](q, l) = ti > kMassEpsilon ? c.x_sum[t](q, l) / ti : fallback.mu[t](q, l);
          dg.carried_cells += (dy > kMassEpsilon ? 0 : 1) + (ti > kMassEpsilon ? 0 : 1);
        }
      }
    }
  }

  // Pooled residual variance around the fitted means.
  double mass = 0.0, ss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::uint32_t i : d.present[t]) {
      const auto ri = tau.at(i, t);
      for (const Tie& tie : d.out[t][i]) {
        const auto rj = tau.at(tie.other, t);
        for (std::size_t q = 0; q < Q; ++q) {
          if (ri[q] == 0.0) continue;
          for (std::size_t l = 0; l < Q; ++l) {
            const double w = ri[q] * rj[l];
            const double r = tie.x - m.mu[t](q, l);
            mass += w;
            ss += w * r * r;
          }
        }
      }
    }
  }
  m.sigma2 = mass > kMassEpsilon ? std::max(ss / mass, sigma2_floor) : std::max(fallback.sigma2, sigma2_floor);
  return m;
}

}  // namespace detail

BlockModel m_step(const TemporalNetwork& net, const VariationalState& state, const BlockModel* previous,
                  double sigma2_floor) {
  detail::MStepDiagnostics diag;
  BlockModel m = detail::m_step_impl(detail::make_dyads(net), state, previous, sigma2_floor, &diag);
  if (diag.identity_pi) logger()->warn("single time slice: transition matrix reported as identity");
  if (diag.carried_cells > 0) {
    logger()->warn("{} parameter cells had no expected mass and were carried over", diag.carried_cells);
  }
  return m;
}

}  // namespace tradesbm::sbm
