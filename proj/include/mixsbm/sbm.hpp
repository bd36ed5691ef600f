#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "mixsbm/network.hpp"
#include "mixsbm/permutation.hpp"
#include "mixsbm/random.hpp"

namespace mixsbm {

using Count = std::int64_t;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;

/// Per-network block labels, 0-based.
using Labels = std::vector<int>;

class SbmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block proportions and connectivity of one stochastic block model.
struct SbmParams {
  Eigen::VectorXd pi;
  Eigen::MatrixXd gamma;

  int K() const { return static_cast<int>(pi.size()); }

  /// Throws SbmError unless pi sums to one (within 1e-12), all entries lie in
  /// [0, 1] and gamma is K x K.
  void validate() const;

  SbmParams permuted(const BlockPermutation& perm) const;

  friend bool operator==(const SbmParams& a, const SbmParams& b) {
    return a.pi.size() == b.pi.size() && a.gamma.rows() == b.gamma.rows() &&
           a.pi == b.pi && a.gamma == b.gamma;
  }
};

/// {"pi": [...], "gamma": [[...], ...]}
nlohmann::json to_json(const SbmParams& params);
SbmParams params_from_json(const nlohmann::json& j);

/// Prior hyperparameters: Dirichlet(alpha) on block proportions,
/// Beta(eta, zeta) on every connectivity and Dirichlet(lambda) on cluster
/// proportions.
struct Hyperparams {
  double alpha = 1.0;
  double eta = 1.0;
  double zeta = 1.0;
  double lambda = 1.0;

  void validate() const;
};

/// Sufficient statistics of a set of labeled networks sharing one SBM.
///
/// s(k): vertices in block k; a(k,l): edges from block k to block l;
/// r(k,l): ordered vertex pairs from k to l (s_k s_l off the diagonal,
/// s_k (s_k - 1) on it, computed per network before summing);
/// b = r - a: non-edges.
struct CountStats {
  CountVector s;
  CountMatrix a;
  CountMatrix b;
  CountMatrix r;
  Count n_total = 0;
  Count m_count = 0;

  static CountStats zeros(int K);

  int K() const { return static_cast<int>(s.size()); }

  CountStats& operator+=(const CountStats& other);
  friend CountStats operator+(CountStats lhs, const CountStats& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend bool operator==(const CountStats& x, const CountStats& y) {
    return x.K() == y.K() && x.s == y.s && x.a == y.a && x.b == y.b &&
           x.r == y.r && x.n_total == y.n_total && x.m_count == y.m_count;
  }

  /// Reorders blocks: block k of the result is block perm[k] of this.
  CountStats permuted(const BlockPermutation& perm) const;
  /// Appends empty blocks up to K blocks in total.
  CountStats padded(int K) const;
};

/// Counts for one network; labels must be < K.
CountStats count_stats(const Network& network, const Labels& labels, int K);
/// Sum of per-network counts.
CountStats count_stats(const std::vector<const Network*>& networks,
                       const std::vector<Labels>& labels, int K);

/// Draws block labels i.i.d. from pi and each ordered pair i != j as an edge
/// with probability gamma(Z_i, Z_j).
struct SampledNetwork {
  Network network;
  Labels labels;
};
SampledNetwork sample_network(const SbmParams& params, Vertex n, Rng& rng);

double log_gamma(double x);
/// log B(x, y)
double log_beta(double x, double y);

/// Exact log p(A, Z) with pi and gamma integrated out under the conjugate
/// priors (closed form in log-gamma functions).
double icl_sbm(const CountStats& stats, const Hyperparams& hyper);

/// ICL(K with an empty block) - ICL(K - 1 without it), for `n_total`
/// vertices in total. Always negative for K >= 2.
double empty_block_penalty(int K, double alpha, Count n_total);

enum class DegeneratePolicy {
  /// Throw SbmError naming the block (pair) whose MAP denominator is <= 0.
  Throw,
  /// Use the posterior mean (eta + a) / (eta + zeta + a + b) for such pairs.
  PosteriorMean,
};

/// Clamp bound applied to MAP proportions and connectivities.
inline constexpr double kMapClamp = 1e-12;

/// Posterior mode of (pi, gamma) given the counts, clamped to
/// [1e-12, 1 - 1e-12] (pi is renormalized after clamping).
SbmParams map_estimate(const CountStats& stats, const Hyperparams& hyper,
                       DegeneratePolicy policy = DegeneratePolicy::Throw);
/// The same estimate before clamping; entries may hit 0 or 1.
SbmParams map_estimate_unclamped(const CountStats& stats, const Hyperparams& hyper,
                                 DegeneratePolicy policy = DegeneratePolicy::Throw);

}  // namespace mixsbm
