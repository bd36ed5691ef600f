#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the closed forms under test: marginals come from numerical integration,
// distances from grid sums, gains from full recomputation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "mixsbm/eval.hpp"
#include "mixsbm/mixture.hpp"
#include "mixsbm/sbm.hpp"

namespace oracle {

using namespace mixsbm;

/// Tanh-sinh quadrature on (0, 1) of exp(log_f(x, 1 - x)); copes with integrable
/// endpoint singularities such as x^(-1/2). Weights are combined with the
/// integrand in log space so neither overflows near the ends.
inline double integrate01_log(const std::function<double(double, double)>& log_f, double h = 1.0 / 256,
                              double t_max = 6.5) {
  const double half_pi = std::acos(0.0);
  double sum = 0.0;
  for (double t = -t_max; t <= t_max + 1e-12; t += h) {
    const double s = half_pi * std::sinh(t);
    // x = (1 + tanh s) / 2, written to keep precision near both ends.
    const double e = std::exp(-2.0 * std::abs(s));
    const double small = e / (1.0 + e);  // distance to the nearer endpoint
    const double x = s < 0 ? small : 1.0 - small;
    const double one_minus_x = s < 0 ? 1.0 - small : small;
    if (x <= 0.0 || one_minus_x <= 0.0) continue;
    const double log_cosh_s = std::abs(s) + std::log1p(e) - std::log(2.0);
    const double log_w = std::log(0.5 * half_pi * std::cosh(t)) - 2.0 * log_cosh_s;
    sum += std::exp(log_w + log_f(x, one_minus_x));
  }
  return sum * h;
}

/// log of the integral over (0,1) of x^(p-1) (1-x)^(q-1), by quadrature.
inline double log_beta_quadrature(double p, double q) {
  // Scale by the integrand's maximum so large exponents do not underflow.
  const double mode = (p > 1 && q > 1) ? (p - 1) / (p + q - 2) : 0.5;
  const double log_peak = (p - 1) * std::log(mode) + (q - 1) * std::log1p(-mode);
  auto log_f = [&](double x, double one_minus_x) {
    return (p - 1) * std::log(x) + (q - 1) * std::log(one_minus_x) - log_peak;
  };
  return std::log(integrate01_log(log_f)) + log_peak;
}

/// Counts of edges and ordered pairs per block pair, by enumerating pairs.
struct PairCounts {
  std::vector<long long> s;
  std::vector<std::vector<long long>> a, b;
};

inline PairCounts enumerate_pairs(const std::vector<const Network*>& nets,
                                  const std::vector<Labels>& labels, int K) {
  PairCounts pc;
  pc.s.assign(K, 0);
  pc.a.assign(K, std::vector<long long>(K, 0));
  pc.b = pc.a;
  for (std::size_t m = 0; m < nets.size(); ++m) {
    const Vertex n = nets[m]->size();
    for (Vertex i = 0; i < n; ++i) {
      ++pc.s[labels[m][i]];
      for (Vertex j = 0; j < n; ++j) {
        if (i == j) continue;
        auto& cell = nets[m]->has_edge(i, j) ? pc.a : pc.b;
        ++cell[labels[m][i]][labels[m][j]];
      }
    }
  }
  return pc;
}

/// log p(A, Z) for K <= 2 by quadrature over pi and every gamma entry.
inline double icl_by_quadrature(const std::vector<const Network*>& nets,
                                const std::vector<Labels>& labels, int K, const Hyperparams& h) {
  const PairCounts pc = enumerate_pairs(nets, labels, K);
  double total = 0.0;
  if (K == 2) {
    total += log_beta_quadrature(h.alpha + pc.s[0], h.alpha + pc.s[1]) -
             log_beta_quadrature(h.alpha, h.alpha);
  } else if (K != 1) {
    throw std::invalid_argument("quadrature oracle handles K <= 2");
  }
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      total += log_beta_quadrature(h.eta + pc.a[k][l], h.zeta + pc.b[k][l]) -
               log_beta_quadrature(h.eta, h.zeta);
  return total;
}

/// ICL of a labeling from scratch: labels are compacted (empty blocks
/// removed) before counting.
inline double icl_from_scratch(const std::vector<const Network*>& nets, std::vector<Labels> labels,
                               const Hyperparams& h) {
  int K = 0;
  for (const auto& z : labels)
    for (int v : z) K = std::max(K, v + 1);
  std::vector<int> used(K, 0);
  for (const auto& z : labels)
    for (int v : z) used[v] = 1;
  std::vector<int> remap(K, -1);
  int next = 0;
  for (int k = 0; k < K; ++k)
    if (used[k]) remap[k] = next++;
  for (auto& z : labels)
    for (auto& v : z) v = remap[v];
  return icl_sbm(count_stats(nets, labels, next), h);
}

/// ICL^mix of a partition of networks with given labels, from scratch.
inline double icl_mix_from_scratch(const NetworkCollection& coll,
                                   const std::vector<std::vector<std::size_t>>& clusters,
                                   const std::vector<std::vector<Labels>>& labels,
                                   const Hyperparams& h) {
  double total = 0.0;
  const double C = static_cast<double>(clusters.size());
  const double M = static_cast<double>(coll.size());
  total += std::lgamma(C * h.lambda) - C * std::lgamma(h.lambda) - std::lgamma(C * h.lambda + M);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::vector<const Network*> nets;
    for (auto m : clusters[c]) nets.push_back(&coll.networks[m]);
    total += std::lgamma(h.lambda + static_cast<double>(clusters[c].size()));
    total += icl_from_scratch(nets, labels[c], h);
  }
  return total;
}

/// Merge gain of clusters a and b under the permutations of `gain`, as the
/// difference of two full ICL^mix evaluations.
inline double merge_gain_from_scratch(const ClusteringState& state, int a, int b,
                                      const BlockPermutation& pa, const BlockPermutation& pb) {
  if (a > b) std::swap(a, b);
  std::vector<std::vector<std::size_t>> before, after;
  std::vector<std::vector<Labels>> lb, la;
  std::vector<std::size_t> merged;
  std::vector<Labels> merged_labels;
  for (int id : state.live_ids()) {
    const Cluster& c = state.cluster(id);
    before.push_back(c.members);
    lb.push_back(c.model.labels());
    if (id == a || id == b) {
      const BlockPermutation inv = (id == a ? pa : pb).inverse();
      for (std::size_t t = 0; t < c.members.size(); ++t) {
        merged.push_back(c.members[t]);
        Labels z = c.model.labels()[t];
        for (auto& v : z) v = inv[v];
        merged_labels.push_back(z);
      }
    } else {
      after.push_back(c.members);
      la.push_back(c.model.labels());
    }
  }
  after.push_back(merged);
  la.push_back(merged_labels);
  return icl_mix_from_scratch(*state.collection, after, la, state.hyper) -
         icl_mix_from_scratch(*state.collection, before, lb, state.hyper);
}

/// Squared L2 distance of two step graphons by the midpoint rule on a
/// g x g grid.
inline double graphon_distance_squared_grid(const SbmParams& p1, const SbmParams& p2,
                                            int g = 2000) {
  auto blocks = [g](const SbmParams& p) {
    std::vector<int> idx(g);
    for (int i = 0; i < g; ++i) {
      const double u = (i + 0.5) / g;
      double acc = 0.0;
      int k = 0;
      for (; k < p.K() - 1; ++k) {
        acc += p.pi(k);
        if (u <= acc) break;
      }
      idx[i] = k;
    }
    return idx;
  };
  const auto b1 = blocks(p1);
  const auto b2 = blocks(p2);
  double sum = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double d = p1.gamma(b1[i], b1[j]) - p2.gamma(b2[i], b2[j]);
      sum += d * d;
    }
  return sum / (static_cast<double>(g) * g);
}

/// Adjusted Rand index by enumerating all pairs of items.
inline double ari_by_pairs(const std::vector<int>& u, const std::vector<int>& v) {
  const std::size_t n = u.size();
  double both = 0, only_u = 0, only_v = 0, neither = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool su = u[i] == u[j];
      const bool sv = v[i] == v[j];
      if (su && sv) ++both;
      else if (su) ++only_u;
      else if (sv) ++only_v;
      else ++neither;
    }
  const double pairs = both + only_u + only_v + neither;
  const double same_u = both + only_u;
  const double same_v = both + only_v;
  const double expected = same_u * same_v / pairs;
  const double max_index = (same_u + same_v) / 2;
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

inline SbmParams random_params(int K, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SbmParams p{Eigen::VectorXd(K), Eigen::MatrixXd(K, K)};
  for (int k = 0; k < K; ++k) p.pi(k) = 0.05 + unif(rng);
  p.pi /= p.pi.sum();
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) p.gamma(k, l) = unif(rng);
  return p;
}

inline BlockPermutation random_permutation(int K, Rng& rng) {
  BlockPermutation p = BlockPermutation::identity(K);
  std::shuffle(p.order.begin(), p.order.end(), rng);
  return p;
}

/// Networks drawn from a random SBM each, labels uniformly random over a
/// random block count (empty blocks allowed).
struct RandomInstance {
  NetworkCollection coll;
  std::vector<Labels> labels;
  std::vector<int> K;
};

inline RandomInstance random_instance(int M, Vertex n_max, int k_max, Rng& rng) {
  RandomInstance inst;
  std::uniform_int_distribution<Vertex> n_draw(2, n_max);
  std::uniform_int_distribution<int> k_draw(1, k_max);
  for (int m = 0; m < M; ++m) {
    const Vertex n = n_draw(rng);
    const int K = std::min<int>(k_draw(rng), n);
    SampledNetwork s = sample_network(random_params(K, rng), n, rng);
    inst.coll.networks.push_back(std::move(s.network));
    inst.labels.push_back(random_full_labels(n, K, rng));
    inst.K.push_back(K);
  }
  return inst;
}

}  // namespace oracle
