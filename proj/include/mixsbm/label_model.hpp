#pragma once

#include <vector>

#include "mixsbm/sbm.hpp"

namespace mixsbm {

/// Moves with a gain at or below this are treated as non-improving, so that
/// rounding noise cannot make the sweep cycle between equivalent labelings.
inline constexpr double kMinMoveGain = 1e-10;

struct SweepOptions {
  int max_sweeps = 100;
  /// Keep the ICL after every accepted move in `SweepReport::trace`.
  bool record_trace = false;
};

struct SweepReport {
  double icl = 0.0;
  std::size_t accepted = 0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// One SBM fitted jointly to several i.i.d. networks: node labels plus the
/// aggregated count statistics, kept in sync under single-vertex moves.
///
/// Empty blocks never survive a move: when a vertex leaves the last member of
/// its block, the block is dropped and labels above it shift down by one.
class LabelModel {
 public:
  LabelModel(std::vector<const Network*> networks, std::vector<Labels> labels, int K,
             Hyperparams hyper);

  int K() const { return stats_.K(); }
  std::size_t network_count() const { return networks_.size(); }
  const Network& network(std::size_t m) const { return *networks_[m]; }
  const std::vector<Labels>& labels() const { return labels_; }
  const CountStats& stats() const { return stats_; }
  const Hyperparams& hyper() const { return hyper_; }

  double icl() const { return icl_sbm(stats_, hyper_); }

  /// ICL change when vertex i of network m moves to block h, computed from
  /// the rows and columns g and h only. Includes the change of K when i is
  /// the last vertex of its block. Zero for h == current block.
  double swap_delta(std::size_t m, Vertex i, int h) const;

  /// Applies the move (dropping the old block if it becomes empty).
  void move(std::size_t m, Vertex i, int h);

  /// Greedy node-swap ascent. Each sweep visits every (network, vertex) pair
  /// in a fresh random order and applies the best move when its gain exceeds
  /// kMinMoveGain. Stops after a sweep with no accepted move.
  SweepReport maximize(Rng& rng, const SweepOptions& options = {});

  /// Drops empty blocks and compacts labels. Returns the number removed.
  int drop_empty_blocks();

 private:
  void neighbor_blocks(std::size_t m, Vertex i, std::vector<Count>& in,
                       std::vector<Count>& out) const;
  double delta_with(std::size_t m, Vertex i, int h, const std::vector<Count>& in,
                    const std::vector<Count>& out) const;

  std::vector<const Network*> networks_;
  std::vector<Labels> labels_;
  std::vector<CountVector> block_sizes_;  // per-network s
  CountStats stats_;
  Hyperparams hyper_;
};

/// Random labels over K blocks with every block used (requires K <= n).
Labels random_full_labels(Vertex n, int K, Rng& rng);

}  // namespace mixsbm
