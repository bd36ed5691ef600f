#pragma once

#include <cstdint>
#include <vector>

#include "mixsbm/network.hpp"
#include "mixsbm/sbm.hpp"

namespace mixsbm {

/// Per-network SBM fit used to seed the agglomeration.
struct InitConfig {
  int k_min = 1;
  /// 0 selects min(6, max(1, n / 3)) per network.
  int k_max = 0;
  int restarts = 10;
  int max_sweeps = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  int k_max_for(Vertex n) const;
  void validate() const;
};

struct InitResult {
  Labels labels;
  SbmParams params;
  int K = 0;
  double icl = 0.0;
};

/// Best ICL over every (K, restart) run of the node-swap maximizer started
/// from a random labeling with all K blocks used. Runs that empty blocks end
/// up with a smaller K, so the ICL decides the block count.
InitResult init_network(const Network& network, const Hyperparams& hyper,
                        const InitConfig& config, Rng& rng);

/// Independent fits, one per network. Each network's generator is seeded from
/// its content hash and `config.seed`, so results do not depend on the order
/// of the collection or the thread count.
std::vector<InitResult> init_collection(const NetworkCollection& collection,
                                        const Hyperparams& hyper,
                                        const InitConfig& config);

std::uint64_t network_seed(const Network& network, std::uint64_t seed);

}  // namespace mixsbm
