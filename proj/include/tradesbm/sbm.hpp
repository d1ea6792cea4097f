#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/netbuild.hpp"

namespace tradesbm::sbm {

// Probabilities inside logarithms are confined to [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-9;
inline constexpr double kDefaultSigma2Floor = 1e-6;

// Dynamic stochastic blockmodel with a fixed group count. Group indices are
// 0-based internally; labels written to disk are 1-based.
//
// Each node's membership follows a Markov chain (alpha, pi). A dyad (i, j) at
// time t with groups (q, l) carries a tie with probability beta[t](q, l); a
// present tie's log-weight is Gaussian with mean mu[t](q, l) and the shared
// variance sigma2. Diagonal entries of beta and mu are the same at every t.
struct BlockModel {
  int groups = 0;
  std::vector<double> alpha;
  DenseMatrix pi;
  std::vector<DenseMatrix> beta;
  std::vector<DenseMatrix> mu;
  double sigma2 = 1.0;

  std::size_t horizon() const { return beta.size(); }
};

// Node x time x group marginals.
class Marginals {
 public:
  Marginals() = default;
  Marginals(std::size_t nodes, std::size_t times, std::size_t groups, double fill = 0.0)
      : nodes_(nodes), times_(times), groups_(groups), data_(nodes * times * groups, fill) {}

  std::size_t nodes() const { return nodes_; }
  std::size_t times() const { return times_; }
  std::size_t groups() const { return groups_; }

  double& operator()(std::size_t i, std::size_t t, std::size_t q) { return data_[(i * times_ + t) * groups_ + q]; }
  double operator()(std::size_t i, std::size_t t, std::size_t q) const { return data_[(i * times_ + t) * groups_ + q]; }
  std::span<double> at(std::size_t i, std::size_t t) { return {data_.data() + (i * times_ + t) * groups_, groups_}; }
  std::span<const double> at(std::size_t i, std::size_t t) const {
    return {data_.data() + (i * times_ + t) * groups_, groups_};
  }

  bool operator==(const Marginals&) const = default;

 private:
  std::size_t nodes_ = 0, times_ = 0, groups_ = 0;
  std::vector<double> data_;
};

// Node x transition x group x group pairwise marginals; transition s links
// time s to s + 1.
class PairMarginals {
 public:
  PairMarginals() = default;
  PairMarginals(std::size_t nodes, std::size_t transitions, std::size_t groups)
      : nodes_(nodes), transitions_(transitions), groups_(groups), data_(nodes * transitions * groups * groups, 0.0) {}

  std::size_t nodes() const { return nodes_; }
  std::size_t transitions() const { return transitions_; }
  std::size_t groups() const { return groups_; }

  double& operator()(std::size_t i, std::size_t s, std::size_t q, std::size_t l) {
    return data_[((i * transitions_ + s) * groups_ + q) * groups_ + l];
  }
  double operator()(std::size_t i, std::size_t s, std::size_t q, std::size_t l) const {
    return data_[((i * transitions_ + s) * groups_ + q) * groups_ + l];
  }

  bool operator==(const PairMarginals&) const = default;

 private:
  std::size_t nodes_ = 0, transitions_ = 0, groups_ = 0;
  std::vector<double> data_;
};

struct VariationalState {
  Marginals tau;
  PairMarginals xi;
  std::vector<double> elbo_trace;
};

struct FitResult {
  BlockModel model;
  VariationalState state;
  Matrix<int> map_labels;  // nodes x times, 1-based
  double elbo = 0.0;
  double icl = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_tried = 0;
  std::uint64_t seed = 0;
  std::string input_digest;
};

enum class UpdateSchedule {
  // Nodes updated in universe order, each seeing its predecessors' new
  // marginals. Every node update is an exact coordinate ascent step.
  gauss_seidel,
  // Every node reads the previous sweep's marginals; updates run on
  // `threads` workers and the result does not depend on the thread count.
  // A sweep that would lower the bound is replaced by a Gauss-Seidel sweep.
  jacobi,
};

struct EStepOptions {
  int max_sweeps = 50;
  double tolerance = 1e-6;  // max abs tau change between sweeps
  UpdateSchedule schedule = UpdateSchedule::gauss_seidel;
  unsigned threads = 1;
};

struct FitOptions {
  int restarts = 10;
  int max_iters = 200;
  std::uint64_t seed = 1;
  double relative_tolerance = 1e-8;
  double sigma2_floor = kDefaultSigma2Floor;
  EStepOptions estep;
};

// Seeds for restart r are seed + r * kRestartSeedStride.
inline constexpr std::uint64_t kRestartSeedStride = 0x9E3779B97F4A7C15ULL;

double transform_weight(double weight);

// Soft start from k-means on each node's time-averaged (row, column) weight
// profile: 0.95 on the assigned group, the rest spread evenly.
VariationalState init_partition(const TemporalNetwork& net, int groups, std::uint64_t seed);

// Log-probability of one dyad observation; std::nullopt is an absent tie.
double emission_logprob(const BlockModel& model, std::size_t t, std::size_t q, std::size_t l,
                        std::optional<double> weight);

struct ChainPosterior {
  DenseMatrix tau;               // times x groups
  std::vector<DenseMatrix> xi;   // transitions of groups x groups
  double loglik = 0.0;
};

// Exact posterior of a single hidden chain given per-time log evidence
// (times x groups), computed with per-step rescaling.
ChainPosterior forward_backward(const DenseMatrix& log_emissions, std::span<const double> alpha,
                                const DenseMatrix& pi);

VariationalState e_step(const TemporalNetwork& net, const BlockModel& model, const VariationalState& state,
                        const EStepOptions& options = {});

// Closed-form maximizer of the bound given the marginals. Cells with no
// expected mass keep the value from `previous` (or a neutral default).
BlockModel m_step(const TemporalNetwork& net, const VariationalState& state, const BlockModel* previous = nullptr,
                  double sigma2_floor = kDefaultSigma2Floor);

double elbo(const TemporalNetwork& net, const BlockModel& model, const VariationalState& state);

// Per-(node, time) argmax of tau, ties to the lower group; 1-based.
Matrix<int> map_labels(const Marginals& tau);

FitResult fit(const TemporalNetwork& net, int groups, const FitOptions& options = {});

// Runs EM from a given state instead of a fresh initialization.
FitResult fit_from(const TemporalNetwork& net, VariationalState start, const BlockModel* previous,
                   const FitOptions& options);

double icl(const TemporalNetwork& net, const FitResult& result);

struct SweepRow {
  int groups = 0;
  double icl = 0.0;
  double elbo = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<int> recommended;
  std::vector<FitResult> fits;  // parallel to rows; default-constructed on failure
};

SweepResult sweep_q(const TemporalNetwork& net, int min_groups, int max_groups, const FitOptions& options = {});

// Adds `extra` empty groups to a fit (zero initial and entry probability,
// zero marginal mass). The bound is unchanged.
std::pair<BlockModel, VariationalState> embed_groups(const BlockModel& model, const VariationalState& state,
                                                     int extra);

}  // namespace tradesbm::sbm
