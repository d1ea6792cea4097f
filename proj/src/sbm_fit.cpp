#include <algorithm>
#include <cmath>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/log.hpp"

namespace tradesbm::sbm {

Matrix<int> map_labels(const Marginals& tau) {
  Matrix<int> labels(tau.nodes(), tau.times(), 0);
  for (std::size_t i = 0; i < tau.nodes(); ++i) {
    for (std::size_t t = 0; t < tau.times(); ++t) {
      const auto r = tau.at(i, t);
      // max_element returns the first maximum, i.e. the lowest group index.
      labels(i, t) = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin()) + 1;
    }
  }
  return labels;
}

namespace detail {

FitResult run_em(const DyadData& data, VariationalState state, const BlockModel* previous,
                 const FitOptions& options) {
  MStepDiagnostics diag;
  FitResult r;
  r.model = m_step_impl(data, state, previous, options.sigma2_floor, &diag);
  state.elbo_trace.clear();
  double current = elbo_impl(data, r.model, state);
  state.elbo_trace.push_back(current);
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    state = e_step_impl(data, r.model, state, options.estep);
    r.model = m_step_impl(data, state, &r.model, options.sigma2_floor, &diag);
    const double next = elbo_impl(data, r.model, state);
    state.elbo_trace.push_back(next);
    r.iterations = iter;
    const double change = std::abs(next - current);
    current = next;
    if (change <= options.relative_tolerance * std::abs(current)) {
      r.converged = true;
      break;
    }
  }
  if (diag.identity_pi) logger()->warn("single time slice: transition matrix reported as identity");
  if (diag.carried_cells > 0) {
    logger()->debug("{} parameter cells carried over for lack of expected mass", diag.carried_cells);
  }
  r.elbo = current;
  r.map_labels = map_labels(state.tau);
  r.state = std::move(state);
  r.icl = icl_impl(data, r);
  return r;
}

}  // namespace detail

namespace {

void check_fit_inputs(const TemporalNetwork& net, int groups, const FitOptions& options) {
  if (groups < 1) throw InputError("group count must be at least 1");
  if (net.nodes() == 0 || net.horizon() == 0) throw InputError("cannot fit an empty network");
  if (options.restarts < 1) throw InputError("at least one restart is required");
  if (options.max_iters < 1) throw InputError("max_iters must be positive");
}

}  // namespace

FitResult fit_from(const TemporalNetwork& net, VariationalState start, const BlockModel* previous,
                   const FitOptions& options) {
  const auto data = detail::make_dyads(net);
  FitResult r = detail::run_em(data, std::move(start), previous, options);
  r.restarts_tried = 1;
  r.seed = options.seed;
  r.input_digest = net.input_digest;
  return r;
}

FitResult fit(const TemporalNetwork& net, int groups, const FitOptions& options) {
  check_fit_inputs(net, groups, options);
  const auto data = detail::make_dyads(net);
  std::optional<FitResult> best;
  std::string last_error;
  for (int r = 0; r < options.restarts; ++r) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(r) * kRestartSeedStride;
    try {
      FitResult candidate = detail::run_em(data, init_partition(net, groups, seed), nullptr, options);
      if (!best || candidate.elbo > best->elbo) best = std::move(candidate);
    } catch (const NumericError& e) {
      last_error = e.what();
      logger()->warn("restart {} failed: {}", r, last_error);
    }
  }
  if (!best) throw NumericError("all " + std::to_string(options.restarts) + " restarts failed: " + last_error);
  best->restarts_tried = options.restarts;
  best->seed = options.seed;
  best->input_digest = net.input_digest;
  return std::move(*best);
}

std::pair<BlockModel, VariationalState> embed_groups(const BlockModel& model, const VariationalState& state,
                                                     int extra) {
  if (extra < 0) throw InputError("embed_groups: negative group count");
  const auto Q = static_cast<std::size_t>(model.groups);
  const std::size_t R = Q + static_cast<std::size_t>(extra);
  const std::size_t T = model.horizon();

  BlockModel m;
  m.groups = static_cast<int>(R);
  m.alpha.assign(R, 0.0);
  std::copy(model.alpha.begin(), model.alpha.end(), m.alpha.begin());
  m.pi = DenseMatrix(R, R, 0.0);
  for (std::size_t q = 0; q < R; ++q) {
    for (std::size_t l = 0; l < R; ++l) {
      if (q < Q && l < Q) m.pi(q, l) = model.pi(q, l);
    }
    if (q >= Q) m.pi(q, q) = 1.0;
  }
  m.sigma2 = model.sigma2;
  for (std::size_t t = 0; t < T; ++t) {
    DenseMatrix b(R, R, 0.5), mu(R, R, 0.0);
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        b(q, l) = model.beta[t](q, l);
        mu(q, l) = model.mu[t](q, l);
      }
    }
    m.beta.push_back(std::move(b));
    m.mu.push_back(std::move(mu));
  }

  const Marginals& tau = state.tau;
  VariationalState s;
  s.tau = Marginals(tau.nodes(), tau.times(), R);
  s.xi = PairMarginals(tau.nodes(), state.xi.transitions(), R);
  for (std::size_t i = 0; i < tau.nodes(); ++i) {
    for (std::size_t t = 0; t < tau.times(); ++t) {
      for (std::size_t q = 0; q < Q; ++q) s.tau(i, t, q) = tau(i, t, q);
    }
    for (std::size_t x = 0; x < state.xi.transitions(); ++x) {
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) s.xi(i, x, q, l) = state.xi(i, x, q, l);
      }
    }
  }
  s.elbo_trace = state.elbo_trace;
  return {std::move(m), std::move(s)};
}

SweepResult sweep_q(const TemporalNetwork& net, int min_groups, int max_groups, const FitOptions& options) {
  if (min_groups < 1 || max_groups < min_groups) throw InputError("invalid group range");
  SweepResult out;
  out.fits.reserve(static_cast<std::size_t>(max_groups - min_groups + 1));
  const FitResult* previous = nullptr;
  for (int q = min_groups; q <= max_groups; ++q) {
    SweepRow row;
    row.groups = q;
    FitResult best;
    try {
      best = fit(net, q, options);
      // Nested start: the previous optimum plus one empty group has the same
      // bound, so the larger family never ends below it.
      if (previous != nullptr) {
        auto [model, state] = embed_groups(previous->model, previous->state, 1);
        FitResult nested = fit_from(net, std::move(state), &model, options);
        if (nested.elbo > best.elbo) {
          nested.restarts_tried = best.restarts_tried + 1;
          best = std::move(nested);
        }
      }
      row.ok = true;
      row.icl = best.icl;
      row.elbo = best.elbo;
    } catch (const Error& e) {
      row.error = e.what();
      logger()->warn("fit with {} groups failed: {}", q, row.error);
    }
    out.rows.push_back(row);
    out.fits.push_back(std::move(best));
    previous = row.ok ? &out.fits.back() : nullptr;
  }
  for (const auto& row : out.rows) {
    if (row.ok && (!out.recommended || row.icl > out.rows[*out.recommended - min_groups].icl)) {
      out.recommended = row.groups;
    }
  }
  return out;
}

}  // namespace tradesbm::sbm
