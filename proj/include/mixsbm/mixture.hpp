#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixsbm/graphon.hpp"
#include "mixsbm/init.hpp"
#include "mixsbm/label_model.hpp"
#include "mixsbm/network.hpp"
#include "mixsbm/sbm.hpp"

namespace mixsbm {

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A group of networks sharing one SBM. `id` is the smallest network index
/// it has ever contained; `members` are network indices in the order used by
/// `model` (sorted by content hash, then index).
struct Cluster {
  int id = 0;
  std::vector<std::size_t> members;
  LabelModel model;
  SbmParams params;  // MAP estimate from model.stats()
  double icl = 0.0;  // icl_sbm of the cluster

  int K() const { return model.K(); }
  void refresh();
};

struct MergeGain {
  double delta = 0.0;
  BlockPermutation first;   // applied to the cluster with the smaller id
  BlockPermutation second;  // applied to the other one
};

/// Upper-triangular table of merge gains indexed by cluster id.
class DeltaTable {
 public:
  explicit DeltaTable(std::size_t ids = 0);

  std::size_t ids() const { return ids_; }
  bool has(int a, int b) const { return slot(a, b).has_value(); }
  const MergeGain& at(int a, int b) const { return *slot(a, b); }
  void set(int a, int b, MergeGain gain) { slot(a, b) = std::move(gain); }
  void erase(int a, int b) { slot(a, b).reset(); }
  /// Removes every entry involving `id`.
  void drop(int id);
  bool dropped(int id) const { return dropped_[id] != 0; }

 private:
  std::size_t index(int a, int b) const;
  const std::optional<MergeGain>& slot(int a, int b) const { return entries_[index(a, b)]; }
  std::optional<MergeGain>& slot(int a, int b) { return entries_[index(a, b)]; }

  std::size_t ids_ = 0;
  std::vector<std::optional<MergeGain>> entries_;
  std::vector<char> dropped_;
};

struct MergeOptions {
  long long match_budget = kDefaultMatchBudget;
  CanonicalOptions canonical;
  SweepOptions sweep;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Recompute statistics, ICL and the whole gain table from scratch after
  /// every merge and throw VerificationError on any mismatch.
  bool verify = false;
};

struct ClusteringState {
  const NetworkCollection* collection = nullptr;
  Hyperparams hyper;
  std::vector<std::optional<Cluster>> clusters;  // indexed by id
  std::vector<int> U;                            // network -> cluster id
  int C = 0;
  DeltaTable table;
  double icl = 0.0;

  std::size_t M() const { return U.size(); }
  std::vector<int> live_ids() const;
  const Cluster& cluster(int id) const { return *clusters.at(id); }
};

/// Builds C = M singleton clusters from per-network labels, without the gain
/// table.
ClusteringState make_singletons(const NetworkCollection& collection,
                                const Hyperparams& hyper,
                                const std::vector<Labels>& labels,
                                const std::vector<int>& block_counts);

/// log of the Dirichlet-multinomial marginal of the cluster assignment.
double cluster_assignment_term(const std::vector<std::size_t>& cluster_sizes,
                               double lambda, std::size_t M);

/// Sum of per-cluster ICLs plus the cluster-assignment term.
double icl_mix(const ClusteringState& state);

/// Part of a merge gain that depends on the current cluster count C.
double merge_count_term(int C, double lambda, std::size_t M);

/// Increment for unchanged gain entries once the count has dropped to C.
double kappa(int C, double lambda, std::size_t M);

/// ICL change when clusters a and b are merged after matching their block
/// labels (the merged labels are the relabeled ones, not re-optimized). The
/// model with fewer blocks is padded with empty blocks.
MergeGain merge_gain(const ClusteringState& state, int a, int b,
                     const MergeOptions& options = {});

/// Fills the table for every live pair.
void compute_delta_table(ClusteringState& state, const MergeOptions& options = {});

/// Updates the table after `merged` absorbed another cluster and C dropped by
/// one: entries not involving `merged` get kappa(C), entries with `merged` are
/// recomputed, entries of dead clusters are removed. No-op without a merge.
void refresh_delta_table(ClusteringState& state, std::optional<int> merged,
                         const MergeOptions& options = {});

/// Merges b into a (a != b): relabel both sides with the matched
/// permutations, re-optimize the merged labels, refresh the MAP estimate,
/// reassign U to min(a, b) and decrement C. The gain table is not touched.
/// Returns the id of the merged cluster.
int merge_clusters(ClusteringState& state, int a, int b, const MergeOptions& options = {});

struct MergeEvent {
  int step = 0;
  int first = 0;   // surviving id
  int second = 0;  // absorbed id
  double delta = 0.0;  // table gain that selected the merge
  double gain = 0.0;   // realized ICL change including label re-optimization
  double icl_after = 0.0;
  int clusters_after = 0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  double initial_icl = 0.0;
  std::vector<MergeEvent> events;
};

struct FitOptions {
  MergeOptions merge;
  bool force_merge_all = false;
};

struct FitResult {
  ClusteringState state;
  Dendrogram dendrogram;
  double final_max_delta = 0.0;  // best remaining gain when stopped (0 if C = 1)
};

/// Agglomerative ICL maximization from singleton clusters.
FitResult fit(const NetworkCollection& collection, const Hyperparams& hyper,
              const std::vector<InitResult>& init, const FitOptions& options = {});

/// Throws VerificationError if cached statistics or the ICL drift from a
/// from-scratch recomputation.
void verify_state(const ClusteringState& state, double tolerance = 1e-8);
/// Throws VerificationError unless every table entry matches merge_gain.
void verify_table(const ClusteringState& state, const MergeOptions& options,
                  double tolerance = 1e-9);

}  // namespace mixsbm
