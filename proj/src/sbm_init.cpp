#include <algorithm>
#include <limits>
#include <random>

#include "sbm_internal.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/log.hpp"

namespace tradesbm::sbm {
namespace {

constexpr int kKMeansRuns = 4;
constexpr int kKMeansIters = 100;
constexpr double kAssignedMass = 0.95;

using Points = std::vector<std::vector<double>>;

// Row and column weights of each node, averaged over the years it is present.
Points node_profiles(const TemporalNetwork& net) {
  const std::size_t n = net.nodes();
  Points p(n, std::vector<double>(2 * n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    int years = 0;
    for (std::size_t t = 0; t < net.horizon(); ++t) {
      if (!net.present(t, i)) continue;
      ++years;
      for (std::size_t j = 0; j < n; ++j) {
        p[i][j] += net.weight(t, i, j);
        p[i][n + j] += net.weight(t, j, i);
      }
    }
    if (years > 0) {
      for (double& v : p[i]) v /= years;
    }
  }
  return p;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

struct Clustering {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

Clustering kmeans_once(const Points& pts, int k, std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  Points centers;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centers.push_back(pts[pick(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) d2[i] = std::min(d2[i], sq_dist(pts[i], c));
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        if (u < d2[chosen]) break;
        u -= d2[chosen];
      }
    } else {
      chosen = pick(rng);
    }
    centers.push_back(pts[chosen]);
  }

  Clustering out;
  out.labels.assign(n, -1);
  for (int iter = 0; iter < kKMeansIters; ++iter) {
    bool changed = false;
    std::vector<double> best(n);
    for (std::size_t i = 0; i < n; ++i) {
      int arg = 0;
      best[i] = sq_dist(pts[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double dd = sq_dist(pts[i], centers[c]);
        if (dd < best[i]) {
          best[i] = dd;
          arg = c;
        }
      }
      if (out.labels[i] != arg) changed = true;
      out.labels[i] = arg;
    }
    // Reseed empty clusters with the worst-fitted point.
    std::vector<int> sizes(k, 0);
    for (int l : out.labels) ++sizes[l];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      const auto far = static_cast<std::size_t>(std::max_element(best.begin(), best.end()) - best.begin());
      --sizes[out.labels[far]];
      out.labels[far] = c;
      ++sizes[c];
      best[far] = 0.0;
      changed = true;
    }
    for (int c = 0; c < k; ++c) std::fill(centers[c].begin(), centers[c].end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = centers[out.labels[i]];
      for (std::size_t j = 0; j < c.size(); ++j) c[j] += pts[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        for (double& v : centers[c]) v /= sizes[c];
      }
    }
    if (!changed) break;
  }
  out.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) out.inertia += sq_dist(pts[i], centers[out.labels[i]]);
  return out;
}

std::size_t distinct_count(Points pts) {
  std::sort(pts.begin(), pts.end());
  return static_cast<std::size_t>(std::unique(pts.begin(), pts.end()) - pts.begin());
}

}  // namespace

VariationalState init_partition(const TemporalNetwork& net, int groups, std::uint64_t seed) {
  if (groups < 1) throw InputError("group count must be at least 1");
  net.validate();
  const std::size_t N = net.nodes();
  const std::size_t T = net.horizon();
  const auto Q = static_cast<std::size_t>(groups);
  if (N == 0) throw InputError("network has no nodes");

  VariationalState state;
  state.tau = Marginals(N, T, Q);
  state.xi = PairMarginals(N, T > 0 ? T - 1 : 0, Q);
  std::mt19937_64 rng(seed);

  std::vector<std::vector<double>> rows(N, std::vector<double>(Q, 0.0));
  if (Q == 1) {
    for (auto& r : rows) r[0] = 1.0;
  } else {
    const Points pts = node_profiles(net);
    if (distinct_count(pts) < Q) {
      logger()->warn("{} groups requested but only {} distinct node profiles; using random starts", Q,
                     distinct_count(pts));
      std::exponential_distribution<double> expo(1.0);
      for (auto& r : rows) {
        double s = 0.0;
        for (double& v : r) s += (v = expo(rng));
        for (double& v : r) v /= s;
      }
    } else {
      Clustering best;
      for (int run = 0; run < kKMeansRuns; ++run) {
        Clustering c = kmeans_once(pts, groups, rng);
        if (c.inertia < best.inertia) best = std::move(c);
      }
      const double rest = (1.0 - kAssignedMass) / static_cast<double>(Q - 1);
      for (std::size_t i = 0; i < N; ++i) {
        std::fill(rows[i].begin(), rows[i].end(), rest);
        rows[i][best.labels[i]] = kAssignedMass;
      }
    }
  }

  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t q = 0; q < Q; ++q) state.tau(i, t, q) = rows[i][q];
    }
    for (std::size_t s = 0; s + 1 < T; ++s) {
      for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t l = 0; l < Q; ++l) state.xi(i, s, q, l) = rows[i][q] * rows[i][l];
      }
    }
  }
  return state;
}

}  // namespace tradesbm::sbm
