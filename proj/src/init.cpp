#include "mixsbm/init.hpp"

#include <algorithm>

#include "mixsbm/label_model.hpp"
#include "mixsbm/parallel.hpp"

namespace mixsbm {

int InitConfig::k_max_for(Vertex n) const {
  const int upper = k_max > 0 ? k_max : std::min(6, std::max(1, static_cast<int>(n) / 3));
  return std::min(upper, static_cast<int>(n));
}

void InitConfig::validate() const {
  if (k_min < 1) throw SbmError("k_min must be at least 1");
  if (k_max != 0 && k_max < k_min) throw SbmError("k_max must be >= k_min");
  if (restarts < 1) throw SbmError("restarts must be at least 1");
  if (max_sweeps < 1) throw SbmError("max_sweeps must be at least 1");
}

std::uint64_t network_seed(const Network& network, std::uint64_t seed) {
  return mix_seed({seed, network.content_hash()});
}

InitResult init_network(const Network& network, const Hyperparams& hyper,
                        const InitConfig& config, Rng& rng) {
  config.validate();
  const Vertex n = network.size();
  const int k_lo = std::min(config.k_min, static_cast<int>(n));
  const int k_hi = std::max(k_lo, config.k_max_for(n));
  SweepOptions sweep;
  sweep.max_sweeps = config.max_sweeps;

  InitResult best;
  bool have = false;
  for (int K = k_lo; K <= k_hi; ++K) {
    const int runs = K == 1 ? 1 : config.restarts;  // K = 1 has a single labeling
    for (int run = 0; run < runs; ++run) {
      LabelModel model({&network}, {random_full_labels(n, K, rng)}, K, hyper);
      const SweepReport rep = model.maximize(rng, sweep);
      if (!have || rep.icl > best.icl) {
        have = true;
        best.icl = rep.icl;
        best.K = model.K();
        best.labels = model.labels().front();
        best.params = map_estimate(model.stats(), hyper, DegeneratePolicy::PosteriorMean);
      }
    }
  }
  return best;
}

std::vector<InitResult> init_collection(const NetworkCollection& collection,
                                        const Hyperparams& hyper,
                                        const InitConfig& config) {
  config.validate();
  std::vector<InitResult> out(collection.size());
  parallel_for(collection.size(), resolve_threads(config.threads), [&](std::size_t m) {
    const Network& net = collection.networks[m];
    Rng rng(network_seed(net, config.seed));
    out[m] = init_network(net, hyper, config, rng);
  });
  return out;
}

}  // namespace mixsbm
