#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixsbm {

using Vertex = std::int32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Graphs up to this many vertices also keep a dense bit matrix for O(1) edge
/// lookup. Above it, lookup falls back to binary search in the sorted lists.
inline constexpr Vertex kDefaultDenseThreshold = 2048;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directed binary graph without self-loops. Vertices are 0-based.
///
/// Immutable after construction; safe to share between threads.
class Network {
 public:
  Network() = default;

  /// Builds from an edge list. Self-loops and out-of-range endpoints throw;
  /// duplicate edges collapse to one and are counted in `duplicates()`.
  Network(Vertex n, std::span<const Edge> edges,
          Vertex dense_threshold = kDefaultDenseThreshold);

  Vertex size() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t duplicates() const { return duplicates_; }
  bool is_dense() const { return !dense_.empty(); }

  bool has_edge(Vertex i, Vertex j) const;

  /// Sorted targets j of edges i -> j.
  std::span<const Vertex> out_neighbors(Vertex i) const {
    return {out_targets_.data() + out_offsets_[i],
            out_targets_.data() + out_offsets_[i + 1]};
  }
  /// Sorted sources j of edges j -> i.
  std::span<const Vertex> in_neighbors(Vertex i) const {
    return {in_sources_.data() + in_offsets_[i],
            in_sources_.data() + in_offsets_[i + 1]};
  }

  /// All edges in (source, target) lexicographic order.
  std::vector<Edge> edges() const;

  /// 64-bit digest of (n, edge set); identical graphs hash identically
  /// regardless of how their edges were listed.
  std::uint64_t content_hash() const { return hash_; }

  friend bool operator==(const Network& a, const Network& b) {
    return a.n_ == b.n_ && a.out_offsets_ == b.out_offsets_ &&
           a.out_targets_ == b.out_targets_;
  }

 private:
  Vertex n_ = 0;
  std::size_t edge_count_ = 0;
  std::size_t duplicates_ = 0;
  std::uint64_t hash_ = 0;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Vertex> out_targets_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Vertex> in_sources_;
  std::vector<std::uint64_t> dense_;  // row-major bit matrix, n*n bits
};

struct NetworkCollection {
  std::vector<Network> networks;
  /// Either empty or one id per network.
  std::vector<std::string> ids;

  std::size_t size() const { return networks.size(); }
  std::string id_of(std::size_t m) const {
    return ids.empty() ? std::to_string(m) : ids[m];
  }
};

}  // namespace mixsbm
