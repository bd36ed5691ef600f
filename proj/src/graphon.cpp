#include "mixsbm/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixsbm {
namespace {

struct Cell {
  double width;
  int first;   // block of the first graphon
  int second;  // block of the second graphon
};

// Intervals of the common refinement of two break sequences.
std::vector<Cell> refine(const std::vector<double>& b1, const std::vector<double>& b2) {
  std::vector<Cell> cells;
  cells.reserve(b1.size() + b2.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double lo = 0.0;
  const std::size_t k1 = b1.size() - 1;
  const std::size_t k2 = b2.size() - 1;
  while (i < k1 && j < k2) {
    const double hi = std::min(b1[i + 1], b2[j + 1]);
    if (hi > lo) cells.push_back({hi - lo, static_cast<int>(i), static_cast<int>(j)});
    lo = std::max(lo, hi);
    if (b1[i + 1] <= hi) ++i;
    if (b2[j + 1] <= hi) ++j;
  }
  return cells;
}

std::vector<double> prefix_breaks(const Eigen::VectorXd& pi) {
  const auto K = pi.size();
  std::vector<double> q(K + 1, 0.0);
  for (Eigen::Index k = 0; k < K; ++k) q[k + 1] = q[k] + pi(k);
  q[K] = 1.0;
  return q;
}

double squared_distance(const std::vector<Cell>& cells, const Eigen::MatrixXd& g1,
                        const Eigen::MatrixXd& g2) {
  double total = 0.0;
  for (const auto& c : cells) {
    double row = 0.0;
    for (const auto& d : cells) {
      const double diff = g1(c.first, d.first) - g2(c.second, d.second);
      row += diff * diff * d.width;
    }
    total += row * c.width;
  }
  return total;
}

long long factorial_capped(int k, long long cap) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) {
    if (f > cap / i) return cap + 1;
    f *= i;
  }
  return f;
}

}  // namespace

double StepGraphon::operator()(double u, double v) const {
  auto block = [this](double x) {
    auto it = std::lower_bound(breaks.begin() + 1, breaks.end(), x);
    auto k = static_cast<int>(it - breaks.begin()) - 1;
    return std::clamp(k, 0, K() - 1);
  };
  return values(block(u), block(v));
}

StepGraphon graphon_of(const SbmParams& params) {
  return StepGraphon{prefix_breaks(params.pi), params.gamma};
}

double graphon_distance_squared(const SbmParams& p1, const SbmParams& p2) {
  const auto cells = refine(prefix_breaks(p1.pi), prefix_breaks(p2.pi));
  return std::max(0.0, squared_distance(cells, p1.gamma, p2.gamma));
}

double graphon_distance(const SbmParams& p1, const SbmParams& p2) {
  return std::sqrt(graphon_distance_squared(p1, p2));
}

BlockPermutation canonical_permutation(const SbmParams& params,
                                       const CanonicalOptions& options) {
  const BlockDegrees deg = block_degrees(params);
  const double tol = options.tie_tolerance;
  BlockPermutation p = BlockPermutation::identity(params.K());
  std::stable_sort(p.order.begin(), p.order.end(), [&](int a, int b) {
    if (std::abs(deg.out(a) - deg.out(b)) > tol) return deg.out(a) > deg.out(b);
    if (std::abs(deg.in(a) - deg.in(b)) > tol) return deg.in(a) > deg.in(b);
    if (std::abs(params.pi(a) - params.pi(b)) > tol) return params.pi(a) > params.pi(b);
    return a < b;
  });
  return p;
}

BlockMatch match_blocks(const SbmParams& p1, const SbmParams& p2, long long budget,
                        const CanonicalOptions& options) {
  const int k1 = p1.K();
  const int k2 = p2.K();
  const long long f1 = factorial_capped(k1, budget);
  const long long f2 = factorial_capped(k2, budget);
  BlockMatch best;
  if (f1 <= budget && f2 <= budget && f1 * f2 <= budget) {
    best.exhaustive = true;
    double best_sq = std::numeric_limits<double>::infinity();
    BlockPermutation s1 = BlockPermutation::identity(k1);
    std::vector<SbmParams> second_perms;
    std::vector<BlockPermutation> second_orders;
    {
      BlockPermutation s2 = BlockPermutation::identity(k2);
      do {
        second_orders.push_back(s2);
        second_perms.push_back(p2.permuted(s2));
      } while (std::next_permutation(s2.order.begin(), s2.order.end()));
    }
    do {
      const SbmParams q1 = p1.permuted(s1);
      const auto b1 = prefix_breaks(q1.pi);
      for (std::size_t t = 0; t < second_perms.size(); ++t) {
        const auto cells = refine(b1, prefix_breaks(second_perms[t].pi));
        const double sq = squared_distance(cells, q1.gamma, second_perms[t].gamma);
        if (sq < best_sq) {
          best_sq = sq;
          best.first = s1;
          best.second = second_orders[t];
        }
      }
    } while (std::next_permutation(s1.order.begin(), s1.order.end()));
    best.distance = std::sqrt(std::max(0.0, best_sq));
    return best;
  }
  best.first = canonical_permutation(p1, options);
  best.second = canonical_permutation(p2, options);
  best.distance = graphon_distance(p1.permuted(best.first), p2.permuted(best.second));
  return best;
}

BlockDegrees block_degrees(const SbmParams& params) {
  return {params.gamma.transpose() * params.pi, params.gamma * params.pi};
}

}  // namespace mixsbm
