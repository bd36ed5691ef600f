#pragma once

#include <numeric>
#include <vector>

namespace mixsbm {

/// Bijection on the block indices {0, ..., K-1}.
///
/// `order[k]` is the original block that ends up at position k, so permuting
/// parameters reads `pi'[k] = pi[order[k]]` and a vertex whose label was `j`
/// gets the new label `inverse()[j]`.
struct BlockPermutation {
  std::vector<int> order;

  static BlockPermutation identity(int K) {
    BlockPermutation p;
    p.order.resize(K);
    std::iota(p.order.begin(), p.order.end(), 0);
    return p;
  }

  int size() const { return static_cast<int>(order.size()); }
  int operator[](int k) const { return order[k]; }

  bool valid() const {
    std::vector<char> seen(order.size(), 0);
    for (int v : order) {
      if (v < 0 || v >= size() || seen[v]) return false;
      seen[v] = 1;
    }
    return true;
  }

  bool is_identity() const {
    for (int k = 0; k < size(); ++k)
      if (order[k] != k) return false;
    return true;
  }

  BlockPermutation inverse() const {
    BlockPermutation inv;
    inv.order.resize(order.size());
    for (int k = 0; k < size(); ++k) inv.order[order[k]] = k;
    return inv;
  }

  /// (this then other): position k takes `order[other.order[k]]`.
  BlockPermutation then(const BlockPermutation& other) const {
    BlockPermutation out;
    out.order.resize(order.size());
    for (int k = 0; k < size(); ++k) out.order[k] = order[other.order[k]];
    return out;
  }

  friend bool operator==(const BlockPermutation&, const BlockPermutation&) = default;
  friend auto operator<=>(const BlockPermutation& a, const BlockPermutation& b) {
    return a.order <=> b.order;
  }
};

}  // namespace mixsbm
