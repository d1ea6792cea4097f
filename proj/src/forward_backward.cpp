#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tradesbm/error.hpp"
#include "tradesbm/sbm.hpp"

namespace tradesbm::sbm {
namespace {

// Subnormal posteriors would underflow to zero once averaged in the M-step,
// leaving positive mass on a zero-probability parameter.
double flush(double p) { return p < std::numeric_limits<double>::min() ? 0.0 : p; }

}  // namespace

ChainPosterior forward_backward(const DenseMatrix& log_emissions, std::span<const double> alpha,
                                const DenseMatrix& pi) {
  const std::size_t T = log_emissions.rows();
  const std::size_t Q = log_emissions.cols();
  if (T == 0 || Q == 0) throw InputError("forward_backward: empty emission matrix");
  if (alpha.size() != Q || pi.rows() != Q || pi.cols() != Q) {
    throw InputError("forward_backward: dimension mismatch");
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = 0; q < Q; ++q) {
      if (!std::isfinite(log_emissions(t, q))) {
        throw NumericError("forward_backward: non-finite log emission at time " + std::to_string(t) + ", group " +
                           std::to_string(q));
      }
    }
  }

  // scaled[t][q] = exp(e - max_t e); the shift and scale are added back in loglik.
  DenseMatrix scaled(T, Q);
  std::vector<double> shift(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto row = log_emissions.row(t);
    shift[t] = *std::max_element(row.begin(), row.end());
    for (std::size_t q = 0; q < Q; ++q) scaled(t, q) = std::exp(row[q] - shift[t]);
  }

  DenseMatrix fwd(T, Q, 0.0);
  std::vector<double> scale(T);
  for (std::size_t t = 0; t < T; ++t) {
    double c = 0.0;
    for (std::size_t l = 0; l < Q; ++l) {
      double prior = 0.0;
      if (t == 0) {
        prior = alpha[l];
      } else {
        for (std::size_t q = 0; q < Q; ++q) prior += fwd(t - 1, q) * pi(q, l);
      }
      fwd(t, l) = prior * scaled(t, l);
      c += fwd(t, l);
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw NumericError("forward_backward: chain has zero probability at time " + std::to_string(t));
    }
    scale[t] = c;
    for (std::size_t l = 0; l < Q; ++l) fwd(t, l) /= c;
  }

  DenseMatrix bwd(T, Q, 1.0);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t q = 0; q < Q; ++q) {
      double s = 0.0;
      for (std::size_t l = 0; l < Q; ++l) s += pi(q, l) * scaled(t + 1, l) * bwd(t + 1, l);
      bwd(t, q) = s / scale[t + 1];
    }
  }

  ChainPosterior post;
  post.tau = DenseMatrix(T, Q);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = 0; q < Q; ++q) post.tau(t, q) = flush(fwd(t, q) * bwd(t, q));
  }
  post.xi.reserve(T - 1);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    DenseMatrix x(Q, Q);
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        x(q, l) = flush(fwd(t, q) * pi(q, l) * scaled(t + 1, l) * bwd(t + 1, l) / scale[t + 1]);
      }
    }
    post.xi.push_back(std::move(x));
  }
  post.loglik = 0.0;
  for (std::size_t t = 0; t < T; ++t) post.loglik += std::log(scale[t]) + shift[t];
  return post;
}

}  // namespace tradesbm::sbm
