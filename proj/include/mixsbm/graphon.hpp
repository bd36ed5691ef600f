#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixsbm/permutation.hpp"
#include "mixsbm/sbm.hpp"

namespace mixsbm {

/// Piecewise-constant function on [0,1]^2: value(k, l) on the rectangle
/// (breaks[k], breaks[k+1]] x (breaks[l], breaks[l+1]].
struct StepGraphon {
  std::vector<double> breaks;  // K + 1 entries, 0 ... 1
  Eigen::MatrixXd values;

  int K() const { return static_cast<int>(values.rows()); }
  double operator()(double u, double v) const;
};

StepGraphon graphon_of(const SbmParams& params);

/// Squared L2 distance between the graphons of two SBMs, which may have
/// different block counts. Evaluated on the common refinement of both break
/// sequences.
double graphon_distance_squared(const SbmParams& p1, const SbmParams& p2);
double graphon_distance(const SbmParams& p1, const SbmParams& p2);

/// Thresholds used when ordering blocks canonically.
struct CanonicalOptions {
  double tie_tolerance = 1e-10;
};

/// Orders blocks by decreasing out-marginal sum_l pi_l gamma(k, l); ties go
/// to the larger in-marginal, then the larger pi_k, then the original index.
BlockPermutation canonical_permutation(const SbmParams& params,
                                       const CanonicalOptions& options = {});

inline constexpr long long kDefaultMatchBudget = 50'000;

struct BlockMatch {
  BlockPermutation first;
  BlockPermutation second;
  double distance = 0.0;
  bool exhaustive = false;
};

/// Permutations of both parameter sets minimizing the graphon distance
/// between the permuted models. Exhaustive over all K1! * K2! pairs when that
/// product fits in `budget` (ties go to the lexicographically smallest pair);
/// otherwise both sides are put in canonical order.
BlockMatch match_blocks(const SbmParams& p1, const SbmParams& p2,
                        long long budget = kDefaultMatchBudget,
                        const CanonicalOptions& options = {});

struct BlockDegrees {
  Eigen::VectorXd in;   // sum_l pi_l gamma(l, k)
  Eigen::VectorXd out;  // sum_l pi_l gamma(k, l)
};
BlockDegrees block_degrees(const SbmParams& params);

}  // namespace mixsbm
