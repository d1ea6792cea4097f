#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace oracle {

ChainMarginals enumerate_paths(const DenseMatrix& log_emissions, std::span<const double> alpha, const DenseMatrix& pi) {
  const std::size_t T = log_emissions.rows(), Q = log_emissions.cols();
  ChainMarginals out{DenseMatrix(T, Q), std::vector<DenseMatrix>(T > 0 ? T - 1 : 0, DenseMatrix(Q, Q)), 0.0};
  std::vector<std::size_t> path(T, 0);
  double total = 0.0;
  std::size_t paths = 1;
  for (std::size_t t = 0; t < T; ++t) paths *= Q;
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < T; ++t) {
      path[t] = c % Q;
      c /= Q;
    }
    double p = alpha[path[0]] * std::exp(log_emissions(0, path[0]));
    for (std::size_t t = 1; t < T; ++t) p *= pi(path[t - 1], path[t]) * std::exp(log_emissions(t, path[t]));
    total += p;
    for (std::size_t t = 0; t < T; ++t) out.tau(t, path[t]) += p;
    for (std::size_t t = 0; t + 1 < T; ++t) out.xi[t](path[t], path[t + 1]) += p;
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = 0; q < Q; ++q) out.tau(t, q) /= total;
  }
  for (auto& m : out.xi) {
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) m(q, l) /= total;
    }
  }
  out.loglik = std::log(total);
  return out;
}

// Potential-based O(n^3) method (Kuhn-Munkres with row/column potentials).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(n, 0);
  for (int j = 1; j <= n; ++j) result[p[j] - 1] = j - 1;
  return result;
}

std::vector<int> assignment_by_permutation(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t r = 0; r < n; ++r) c += cost[r][perm[r]];
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {
double choose2(double x) { return x * (x - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cells[{a[k], b[k]}] += 1.0;
    rows[a[k]] += 1.0;
    cols[b[k]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, n] : cells) index += choose2(n);
  for (const auto& [key, n] : rows) sum_a += choose2(n);
  for (const auto& [key, n] : cols) sum_b += choose2(n);
  const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<int> match_labels(std::span<const int> truth, std::span<const int> found, int q) {
  std::vector<std::vector<double>> cost(q, std::vector<double>(q, 0.0));
  for (std::size_t k = 0; k < truth.size(); ++k) cost[found[k] - 1][truth[k] - 1] -= 1.0;
  const auto assign = hungarian(cost);
  std::vector<int> out(found.size());
  for (std::size_t k = 0; k < found.size(); ++k) out[k] = assign[found[k] - 1] + 1;
  return out;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng) + 1e-3);
  for (auto& x : v) x /= s;
  return v;
}

DenseMatrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = random_simplex(rng, n);
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

tradesbm::FlowTable random_flow_table(std::mt19937_64& rng, std::size_t max_countries, std::size_t max_years) {
  std::uniform_int_distribution<std::size_t> nc(2, max_countries), ny(1, max_years);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<tradesbm::Cents> value(1, 5'000'000'00);
  const std::size_t n = nc(rng), years = ny(rng);
  const double density = 0.15 + 0.8 * u(rng);
  std::vector<tradesbm::FlowRecord> records;
  for (std::size_t y = 0; y < years; ++y) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || u(rng) > density) continue;
        // Occasional heavy tails so that some shares fall under the cutoff.
        tradesbm::Cents v = value(rng);
        if (u(rng) < 0.2) v *= 50;
        records.push_back({fmt::format("C{:02d}", i), fmt::format("C{:02d}", j), 2000 + static_cast<int>(y), v, v});
      }
    }
    if (records.empty() || records.back().year != 2000 + static_cast<int>(y)) {
      records.push_back({"C00", "C01", 2000 + static_cast<int>(y), value(rng), 0});
    }
  }
  return tradesbm::make_flow_table(std::move(records));
}

}  // namespace oracle
