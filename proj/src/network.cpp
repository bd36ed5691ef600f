#include "mixsbm/network.hpp"

#include <algorithm>

#include "mixsbm/random.hpp"

namespace mixsbm {

Network::Network(Vertex n, std::span<const Edge> edges, Vertex dense_threshold)
    : n_(n) {
  if (n <= 0) throw NetworkError("vertex count must be positive");
  std::vector<Edge> sorted(edges.begin(), edges.end());
  for (const auto& [i, j] : sorted) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw NetworkError("vertex index out of range: " + std::to_string(i) +
                         " " + std::to_string(j) + " (n=" + std::to_string(n) +
                         ")");
    if (i == j) throw NetworkError("self-loop on vertex " + std::to_string(i));
  }
  std::sort(sorted.begin(), sorted.end());
  auto last = std::unique(sorted.begin(), sorted.end());
  duplicates_ = static_cast<std::size_t>(sorted.end() - last);
  sorted.erase(last, sorted.end());
  edge_count_ = sorted.size();

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& [i, j] : sorted) {
    ++out_offsets_[i + 1];
    ++in_offsets_[j + 1];
  }
  for (Vertex v = 0; v < n; ++v) {
    out_offsets_[v + 1] += out_offsets_[v];
    in_offsets_[v + 1] += in_offsets_[v];
  }
  out_targets_.resize(edge_count_);
  in_sources_.resize(edge_count_);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t e = 0; e < sorted.size(); ++e) {
    const auto [i, j] = sorted[e];
    out_targets_[e] = j;  // sorted by (i, j) so out lists are already in place
    in_sources_[in_fill[j]++] = i;  // sources arrive in increasing order
  }

  if (n <= dense_threshold) {
    const std::size_t bits = static_cast<std::size_t>(n) * n;
    dense_.assign((bits + 63) / 64, 0);
    for (const auto& [i, j] : sorted) {
      const std::size_t b = static_cast<std::size_t>(i) * n + j;
      dense_[b / 64] |= std::uint64_t{1} << (b % 64);
    }
  }

  hash_ = mix_seed({static_cast<std::uint64_t>(n), edge_count_});
  for (const auto& [i, j] : sorted)
    hash_ = splitmix64(hash_ ^ ((static_cast<std::uint64_t>(i) << 32) |
                                static_cast<std::uint32_t>(j)));
}

bool Network::has_edge(Vertex i, Vertex j) const {
  if (!dense_.empty()) {
    const std::size_t b = static_cast<std::size_t>(i) * n_ + j;
    return (dense_[b / 64] >> (b % 64)) & 1U;
  }
  auto row = out_neighbors(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex i = 0; i < n_; ++i)
    for (Vertex j : out_neighbors(i)) out.emplace_back(i, j);
  return out;
}

}  // namespace mixsbm
