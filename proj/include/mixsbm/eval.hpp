#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mixsbm/init.hpp"
#include "mixsbm/mixture.hpp"
#include "mixsbm/network.hpp"
#include "mixsbm/sbm.hpp"

namespace mixsbm {

/// Adjusted Rand index of two partitions given as label vectors of equal
/// length. Returns 1 when both partitions are trivial in the same way (the
/// index is undefined there).
double adjusted_rand_index(const std::vector<int>& u, const std::vector<int>& v);

struct ScenarioComponent {
  double weight = 1.0;
  SbmParams params;
};

enum class SizeLaw { Fixed, Uniform, List };

/// Synthetic collection design: a mixture of SBM components plus optional
/// outliers that each get their own randomly drawn SBM.
struct Scenario {
  std::string name = "scenario";
  std::vector<ScenarioComponent> components;
  /// When non-empty, exact number of networks per component (overrides
  /// `M` and the weights for the non-outlier part).
  std::vector<int> counts;
  int M = 1;
  SizeLaw size_law = SizeLaw::Fixed;
  Vertex n_fixed = 10;
  Vertex n_min = 10;
  Vertex n_max = 10;
  std::vector<Vertex> n_list;
  double outlier_fraction = 0.0;
  int outlier_count = -1;  // overrides the fraction when >= 0
  int outlier_k_min = 1;
  int outlier_k_max = 4;
  std::uint64_t seed = 1;

  void validate() const;
  int outliers() const;
  int total_networks() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

struct SimulatedData {
  NetworkCollection collection;
  std::vector<int> U;                // component index; outliers get C, C+1, ...
  std::vector<Labels> labels;        // planted node labels
  std::vector<SbmParams> component_params;
  std::vector<int> outlier_indices;  // networks drawn from their own SBM
};

/// Draws one collection. The generator is seeded from `scenario.seed` and
/// `replicate`.
SimulatedData simulate(const Scenario& scenario, std::uint64_t replicate = 0);

struct GscOptions {
  int restarts = 20;
  int max_iterations = 100;
  long long match_budget = kDefaultMatchBudget;
  std::uint64_t seed = 0;
};

struct GscResult {
  std::vector<int> labels;
  std::string warning;  // non-empty on the degenerate single-cluster path
};

/// Spectral clustering of the matched graphon-distance matrix of
/// per-network SBM estimates.
GscResult gsc_baseline(const std::vector<SbmParams>& per_network, int c_target,
                       const GscOptions& options = {});

/// exp(-d^2 / (2 h^2)) with h the median nonzero off-diagonal distance;
/// zero diagonal.
Eigen::MatrixXd gaussian_similarity(const Eigen::MatrixXd& distances);

/// Lloyd's k-means with k-means++ seeding; best of `restarts` runs.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, int restarts, int max_iterations,
                        Rng& rng);

enum class Method { Hier, HierForceMergeAll, Gsc };
Method parse_method(const std::string& name);
std::string to_string(Method method);

struct ExperimentConfig {
  Hyperparams hyper;
  InitConfig init;
  MergeOptions merge;
  int c_target = 0;  // required for Gsc
};

struct ExperimentRow {
  std::string scenario;
  std::string method;
  int replicate = 0;
  int M = 0;
  int c_true = 0;
  int c_hat = 0;
  double ari_clusters = 0.0;
  double ari_labels = 0.0;
  double mean_graphon_dist = 0.0;
  double seconds = 0.0;
  int k_hat = 0;  // block count of the largest estimated cluster
};

/// Result of running one method on one simulated collection.
ExperimentRow evaluate_method(const Scenario& scenario, const SimulatedData& data,
                              Method method, const ExperimentConfig& config);

/// `replicates` independent collections, one row each. Replicate r of every
/// method sees the same simulated data.
std::vector<ExperimentRow> run_experiment(const Scenario& scenario, Method method,
                                          int replicates, const ExperimentConfig& config);

std::string report_header();
std::string report_line(const ExperimentRow& row);

/// Node-label agreement: per-network ARI against planted labels, averaged
/// with weights n^(m).
double weighted_label_ari(const std::vector<Labels>& estimated, const std::vector<Labels>& truth);

}  // namespace mixsbm
