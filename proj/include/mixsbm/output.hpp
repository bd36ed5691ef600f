#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mixsbm/mixture.hpp"

namespace mixsbm {

/// {"U": [...], "clusters": [{"id", "members", "pi", "gamma",
///  "node_labels": {network id: [...]}}], "icl": x}
nlohmann::json clustering_to_json(const ClusteringState& state);

/// {"leaves": [...], "initial_icl": x, "merges": [{"step", "first",
///  "second", "delta", "gain", "icl_after", "clusters_after"}]}
nlohmann::json dendrogram_to_json(const Dendrogram& dendrogram);

/// Newick tree of the merge history. Leaves are network ids, each internal
/// node is labeled with the gain that selected its merge, and branch lengths
/// are differences of merge steps (leaves sit at step 0). Clusters never
/// merged hang off an unlabeled root.
std::string dendrogram_newick(const Dendrogram& dendrogram);

/// TSV with header `step c1 c2 delta icl_after C`.
std::string merge_trace_tsv(const Dendrogram& dendrogram);

/// Checks a clustering document against the schema above; returns an error
/// message or an empty string.
std::string validate_clustering_json(const nlohmann::json& j);
std::string validate_dendrogram_json(const nlohmann::json& j);

}  // namespace mixsbm
