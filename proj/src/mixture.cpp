#include "mixsbm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixsbm/parallel.hpp"

namespace mixsbm {
namespace {

SbmParams cluster_map(const LabelModel& model) {
  return map_estimate(model.stats(), model.hyper(), DegeneratePolicy::PosteriorMean);
}

void order_members(const NetworkCollection& collection, std::vector<std::size_t>& members) {
  std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
    const auto hx = collection.networks[x].content_hash();
    const auto hy = collection.networks[y].content_hash();
    return hx != hy ? hx < hy : x < y;
  });
}

std::uint64_t cluster_seed(const NetworkCollection& collection,
                           const std::vector<std::size_t>& members, std::uint64_t seed) {
  std::uint64_t h = mix_seed({seed, members.size()});
  for (std::size_t m : members) h = mix_seed({h, collection.networks[m].content_hash()});
  return h;
}

// Statistics of a merge candidate: both sides permuted, padded to the larger
// block count and summed.
CountStats merged_stats(const Cluster& x, const Cluster& y, const BlockPermutation& px,
                        const BlockPermutation& py) {
  const int k = std::max(x.K(), y.K());
  return x.model.stats().permuted(px).padded(k) + y.model.stats().permuted(py).padded(k);
}

}  // namespace

void Cluster::refresh() {
  params = cluster_map(model);
  icl = model.icl();
}

DeltaTable::DeltaTable(std::size_t ids)
    : ids_(ids), entries_(ids * (ids > 0 ? ids - 1 : 0) / 2), dropped_(ids, 0) {}

void DeltaTable::drop(int id) {
  for (std::size_t e = 0; e < ids_; ++e)
    if (static_cast<int>(e) != id) erase(id, static_cast<int>(e));
  dropped_[id] = 1;
}

std::size_t DeltaTable::index(int a, int b) const {
  if (a == b) throw std::out_of_range("no table entry for a cluster with itself");
  if (a > b) std::swap(a, b);
  const auto i = static_cast<std::size_t>(a);
  const auto j = static_cast<std::size_t>(b);
  if (j >= ids_) throw std::out_of_range("cluster id out of range");
  // Row i holds pairs (i, i+1) ... (i, ids-1).
  return i * (2 * ids_ - i - 1) / 2 + (j - i - 1);
}

std::vector<int> ClusteringState::live_ids() const {
  std::vector<int> ids;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (clusters[c]) ids.push_back(static_cast<int>(c));
  return ids;
}

ClusteringState make_singletons(const NetworkCollection& collection, const Hyperparams& hyper,
                                const std::vector<Labels>& labels,
                                const std::vector<int>& block_counts) {
  hyper.validate();
  const std::size_t M = collection.size();
  if (labels.size() != M || block_counts.size() != M)
    throw SbmError("one labeling per network required");
  ClusteringState state;
  state.collection = &collection;
  state.hyper = hyper;
  state.clusters.resize(M);
  state.U.resize(M);
  state.C = static_cast<int>(M);
  state.table = DeltaTable(M);
  for (std::size_t m = 0; m < M; ++m) {
    LabelModel model({&collection.networks[m]}, {labels[m]}, block_counts[m], hyper);
    model.drop_empty_blocks();
    Cluster c{static_cast<int>(m), {m}, std::move(model), SbmParams{}, 0.0};
    c.refresh();
    state.clusters[m].emplace(std::move(c));
    state.U[m] = static_cast<int>(m);
  }
  state.icl = icl_mix(state);
  return state;
}

double cluster_assignment_term(const std::vector<std::size_t>& cluster_sizes, double lambda,
                               std::size_t M) {
  const double C = static_cast<double>(cluster_sizes.size());
  double t = log_gamma(C * lambda) - C * log_gamma(lambda) -
             log_gamma(C * lambda + static_cast<double>(M));
  for (auto size : cluster_sizes) t += log_gamma(lambda + static_cast<double>(size));
  return t;
}

double icl_mix(const ClusteringState& state) {
  double total = 0.0;
  std::vector<std::size_t> sizes;
  for (const auto& c : state.clusters) {
    if (!c) continue;
    total += c->model.icl();
    sizes.push_back(c->members.size());
  }
  return total + cluster_assignment_term(sizes, state.hyper.lambda, state.M());
}

double merge_count_term(int C, double lambda, std::size_t M) {
  const double m = static_cast<double>(M);
  return log_beta((C - 1) * lambda, lambda) + log_gamma(C * lambda + m) -
         log_gamma((C - 1) * lambda + m);
}

double kappa(int C, double lambda, std::size_t M) {
  return merge_count_term(C, lambda, M) - merge_count_term(C + 1, lambda, M);
}

MergeGain merge_gain(const ClusteringState& state, int a, int b, const MergeOptions& options) {
  if (a == b) throw SbmError("cannot merge a cluster with itself");
  if (a > b) std::swap(a, b);
  const Cluster& x = state.cluster(a);
  const Cluster& y = state.cluster(b);
  BlockMatch match = match_blocks(x.params, y.params, options.match_budget, options.canonical);
  const CountStats merged = merged_stats(x, y, match.first, match.second);

  const double lambda = state.hyper.lambda;
  const double nx = static_cast<double>(x.members.size());
  const double ny = static_cast<double>(y.members.size());
  MergeGain g;
  g.delta = icl_sbm(merged, state.hyper) - x.icl - y.icl +
            log_gamma(lambda + nx + ny) - log_gamma(lambda + nx) - log_gamma(lambda + ny) +
            merge_count_term(state.C, lambda, state.M());
  g.first = std::move(match.first);
  g.second = std::move(match.second);
  return g;
}

namespace {

void fill_pairs(ClusteringState& state, const std::vector<std::pair<int, int>>& pairs,
                const MergeOptions& options) {
  std::vector<MergeGain> gains(pairs.size());
  parallel_for(pairs.size(), resolve_threads(options.threads), [&](std::size_t t) {
    gains[t] = merge_gain(state, pairs[t].first, pairs[t].second, options);
  });
  for (std::size_t t = 0; t < pairs.size(); ++t)
    state.table.set(pairs[t].first, pairs[t].second, std::move(gains[t]));
}

}  // namespace

void compute_delta_table(ClusteringState& state, const MergeOptions& options) {
  if (state.table.ids() != state.clusters.size()) state.table = DeltaTable(state.clusters.size());
  const auto ids = state.live_ids();
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.emplace_back(ids[i], ids[j]);
  fill_pairs(state, pairs, options);
}

void refresh_delta_table(ClusteringState& state, std::optional<int> merged,
                         const MergeOptions& options) {
  if (!merged) return;
  const int c = *merged;
  const auto n_ids = static_cast<int>(state.clusters.size());
  for (int d = 0; d < n_ids; ++d)
    if (!state.clusters[d] && !state.table.dropped(d)) state.table.drop(d);
  const auto ids = state.live_ids();
  const double k = state.C >= 2 ? kappa(state.C, state.hyper.lambda, state.M()) : 0.0;
  std::vector<std::pair<int, int>> recompute;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const int a = ids[i];
      const int b = ids[j];
      if (a == c || b == c) {
        recompute.emplace_back(a, b);
      } else {
        MergeGain g = state.table.at(a, b);
        g.delta += k;
        state.table.set(a, b, std::move(g));
      }
    }
  }
  fill_pairs(state, recompute, options);
}

int merge_clusters(ClusteringState& state, int a, int b, const MergeOptions& options) {
  if (a == b) throw SbmError("cannot merge a cluster with itself");
  if (a > b) std::swap(a, b);
  if (!state.clusters.at(a) || !state.clusters.at(b))
    throw SbmError("merging a cluster that does not exist");

  BlockPermutation pa;
  BlockPermutation pb;
  if (state.table.ids() == state.clusters.size() && state.table.has(a, b)) {
    pa = state.table.at(a, b).first;
    pb = state.table.at(a, b).second;
  } else {
    BlockMatch match = match_blocks(state.cluster(a).params, state.cluster(b).params,
                                    options.match_budget, options.canonical);
    pa = std::move(match.first);
    pb = std::move(match.second);
  }

  const Cluster& x = state.cluster(a);
  const Cluster& y = state.cluster(b);
  const int K = std::max(x.K(), y.K());

  // Relabel: a vertex in block j moves to the position of j in the matched
  // order.
  std::vector<std::pair<std::size_t, Labels>> relabeled;
  for (const auto* side : {&x, &y}) {
    const BlockPermutation inv = (side == &x ? pa : pb).inverse();
    for (std::size_t t = 0; t < side->members.size(); ++t) {
      Labels z = side->model.labels()[t];
      for (auto& zi : z) zi = inv[zi];
      relabeled.emplace_back(side->members[t], std::move(z));
    }
  }
  std::vector<std::size_t> members;
  for (const auto& [m, z] : relabeled) members.push_back(m);
  order_members(*state.collection, members);
  std::vector<const Network*> nets;
  std::vector<Labels> labels;
  for (std::size_t m : members) {
    nets.push_back(&state.collection->networks[m]);
    auto it = std::find_if(relabeled.begin(), relabeled.end(),
                           [m](const auto& p) { return p.first == m; });
    labels.push_back(std::move(it->second));
  }

  LabelModel model(std::move(nets), std::move(labels), K, state.hyper);
  Rng rng(cluster_seed(*state.collection, members, options.seed));
  model.maximize(rng, options.sweep);

  Cluster merged{a, std::move(members), std::move(model), SbmParams{}, 0.0};
  merged.refresh();

  const double lambda = state.hyper.lambda;
  const double nx = static_cast<double>(x.members.size());
  const double ny = static_cast<double>(y.members.size());
  state.icl += merged.icl - x.icl - y.icl + log_gamma(lambda + nx + ny) -
               log_gamma(lambda + nx) - log_gamma(lambda + ny) +
               merge_count_term(state.C, lambda, state.M());

  for (std::size_t m : merged.members) state.U[m] = a;
  state.clusters[b].reset();
  state.clusters[a].emplace(std::move(merged));
  --state.C;
  return a;
}

void verify_state(const ClusteringState& state, double tolerance) {
  std::size_t covered = 0;
  for (const auto& c : state.clusters) {
    if (!c) continue;
    if (c->members.empty()) throw VerificationError("empty cluster");
    std::vector<const Network*> nets;
    for (std::size_t m : c->members) {
      if (state.U[m] != c->id) throw VerificationError("U inconsistent with cluster members");
      nets.push_back(&state.collection->networks[m]);
    }
    covered += c->members.size();
    const CountStats fresh = count_stats(nets, c->model.labels(), c->K());
    if (!(fresh == c->model.stats()))
      throw VerificationError("cached statistics of cluster " + std::to_string(c->id) +
                              " differ from recomputation");
  }
  if (covered != state.M()) throw VerificationError("clusters do not cover all networks");
  const double fresh = icl_mix(state);
  if (std::abs(fresh - state.icl) > tolerance) {
    std::ostringstream msg;
    msg << "ICL drift: cached " << state.icl << " vs recomputed " << fresh;
    throw VerificationError(msg.str());
  }
}

void verify_table(const ClusteringState& state, const MergeOptions& options, double tolerance) {
  const auto ids = state.live_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (!state.table.has(ids[i], ids[j]))
        throw VerificationError("missing gain table entry");
      const double cached = state.table.at(ids[i], ids[j]).delta;
      const double fresh = merge_gain(state, ids[i], ids[j], options).delta;
      if (std::abs(cached - fresh) > tolerance) {
        std::ostringstream msg;
        msg << "gain table entry (" << ids[i] << "," << ids[j] << ") is " << cached
            << ", recomputed " << fresh;
        throw VerificationError(msg.str());
      }
    }
  }
}

FitResult fit(const NetworkCollection& collection, const Hyperparams& hyper,
              const std::vector<InitResult>& init, const FitOptions& options) {
  if (init.size() != collection.size()) throw SbmError("one init result per network required");
  std::vector<Labels> labels;
  std::vector<int> ks;
  for (const auto& r : init) {
    labels.push_back(r.labels);
    ks.push_back(r.K);
  }
  FitResult result;
  ClusteringState& state = result.state;
  state = make_singletons(collection, hyper, labels, ks);
  result.dendrogram.initial_icl = state.icl;
  for (std::size_t m = 0; m < collection.size(); ++m)
    result.dendrogram.leaves.push_back(collection.id_of(m));

  const MergeOptions& mo = options.merge;
  compute_delta_table(state, mo);
  if (mo.verify) {
    verify_state(state);
    verify_table(state, mo);
  }

  while (state.C > 1) {
    const auto ids = state.live_ids();
    double best = -std::numeric_limits<double>::infinity();
    int ba = -1;
    int bb = -1;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const double d = state.table.at(ids[i], ids[j]).delta;
        if (d > best) {
          best = d;
          ba = ids[i];
          bb = ids[j];
        }
      }
    }
    result.final_max_delta = best;
    if (!(best > 0.0) && !options.force_merge_all) break;

    const double before = state.icl;
    const int merged = merge_clusters(state, ba, bb, mo);
    refresh_delta_table(state, merged, mo);
    if (mo.verify) {
      verify_state(state);
      verify_table(state, mo);
    }
    MergeEvent ev;
    ev.step = static_cast<int>(result.dendrogram.events.size()) + 1;
    ev.first = ba;
    ev.second = bb;
    ev.delta = best;
    ev.gain = state.icl - before;
    ev.icl_after = state.icl;
    ev.clusters_after = state.C;
    result.dendrogram.events.push_back(ev);
  }
  if (state.C == 1) result.final_max_delta = 0.0;
  return result;
}

}  // namespace mixsbm
