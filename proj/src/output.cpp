#include "mixsbm/output.hpp"

#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mixsbm {
using nlohmann::json;

namespace {

std::string fmt(double x, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string newick_name(const std::string& s) {
  if (s.find_first_of("()[]':;, \t") == std::string::npos && !s.empty()) return s;
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += '\'';
    q += c;
  }
  return q + "'";
}

struct TreeNode {
  std::string name;
  int step = 0;
  std::vector<std::shared_ptr<TreeNode>> children;
};

void write_node(std::ostream& out, const TreeNode& node, int parent_step, bool root) {
  if (!node.children.empty()) {
    out << '(';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i) out << ',';
      write_node(out, *node.children[i], node.step, false);
    }
    out << ')';
  }
  out << node.name;
  if (!root) out << ':' << (parent_step - node.step);
}

}  // namespace

json clustering_to_json(const ClusteringState& state) {
  json j;
  j["U"] = state.U;
  json clusters = json::array();
  for (const auto& c : state.clusters) {
    if (!c) continue;
    json cj;
    cj["id"] = c->id;
    std::vector<std::size_t> members = c->members;
    std::sort(members.begin(), members.end());
    cj["members"] = members;
    const json params = to_json(c->params);
    cj["pi"] = params["pi"];
    cj["gamma"] = params["gamma"];
    cj["K"] = c->K();
    cj["icl_sbm"] = c->icl;
    json labels = json::object();
    for (std::size_t t = 0; t < c->members.size(); ++t)
      labels[state.collection->id_of(c->members[t])] = c->model.labels()[t];
    cj["node_labels"] = std::move(labels);
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  j["icl"] = state.icl;
  return j;
}

json dendrogram_to_json(const Dendrogram& d) {
  json j;
  j["leaves"] = d.leaves;
  j["initial_icl"] = d.initial_icl;
  json merges = json::array();
  for (const auto& e : d.events) {
    merges.push_back({{"step", e.step},
                      {"first", e.first},
                      {"second", e.second},
                      {"delta", e.delta},
                      {"gain", e.gain},
                      {"icl_after", e.icl_after},
                      {"clusters_after", e.clusters_after}});
  }
  j["merges"] = std::move(merges);
  return j;
}

std::string dendrogram_newick(const Dendrogram& d) {
  std::map<int, std::shared_ptr<TreeNode>> current;
  for (std::size_t m = 0; m < d.leaves.size(); ++m) {
    auto leaf = std::make_shared<TreeNode>();
    leaf->name = newick_name(d.leaves[m]);
    current[static_cast<int>(m)] = leaf;
  }
  for (const auto& e : d.events) {
    auto node = std::make_shared<TreeNode>();
    node->step = e.step;
    node->name = fmt(e.delta, 8);
    node->children = {current.at(e.first), current.at(e.second)};
    current.erase(e.second);
    current[e.first] = node;
  }
  std::ostringstream out;
  if (current.size() == 1) {
    write_node(out, *current.begin()->second, 0, true);
  } else {
    TreeNode root;
    root.step = d.events.empty() ? 1 : d.events.back().step + 1;
    for (auto& [id, node] : current) root.children.push_back(node);
    write_node(out, root, 0, true);
  }
  out << ';';
  return out.str();
}

std::string merge_trace_tsv(const Dendrogram& d) {
  std::ostringstream out;
  out << "step\tc1\tc2\tdelta\ticl_after\tC\n";
  for (const auto& e : d.events)
    out << e.step << '\t' << e.first << '\t' << e.second << '\t' << fmt(e.delta, 17) << '\t'
        << fmt(e.icl_after, 17) << '\t' << e.clusters_after << '\n';
  return out.str();
}

std::string validate_clustering_json(const json& j) {
  if (!j.is_object()) return "clustering must be an object";
  if (!j.contains("U") || !j["U"].is_array()) return "missing array 'U'";
  if (!j.contains("clusters") || !j["clusters"].is_array()) return "missing array 'clusters'";
  if (!j.contains("icl") || !j["icl"].is_number()) return "missing number 'icl'";
  const std::size_t M = j["U"].size();
  std::vector<int> seen(M, 0);
  for (const auto& c : j["clusters"]) {
    if (!c.is_object()) return "cluster entry must be an object";
    for (const char* key : {"id", "members", "pi", "gamma", "node_labels"})
      if (!c.contains(key)) return std::string("cluster lacks '") + key + "'";
    const auto id = c["id"].get<long long>();
    const std::size_t K = c["pi"].size();
    if (c["gamma"].size() != K) return "gamma row count differs from pi";
    for (const auto& row : c["gamma"])
      if (row.size() != K) return "gamma is not square";
    if (c["members"].empty()) return "cluster without members";
    for (const auto& m : c["members"]) {
      const auto idx = m.get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= M) return "member index out of range";
      if (j["U"][idx].get<long long>() != id) return "U disagrees with cluster members";
      ++seen[idx];
    }
    if (c["node_labels"].size() != c["members"].size()) return "node_labels count mismatch";
    for (const auto& [key, labels] : c["node_labels"].items())
      for (const auto& z : labels)
        if (z.get<long long>() < 0 || static_cast<std::size_t>(z.get<long long>()) >= K)
          return "node label out of range in " + key;
  }
  for (std::size_t m = 0; m < M; ++m)
    if (seen[m] != 1) return "network " + std::to_string(m) + " not in exactly one cluster";
  return {};
}

std::string validate_dendrogram_json(const json& j) {
  if (!j.is_object() || !j.contains("leaves") || !j.contains("merges"))
    return "dendrogram needs 'leaves' and 'merges'";
  const std::size_t M = j["leaves"].size();
  if (j["merges"].size() + 1 > std::max<std::size_t>(M, 1)) return "too many merge events";
  for (const auto& e : j["merges"])
    for (const char* key : {"step", "first", "second", "delta", "icl_after", "clusters_after"})
      if (!e.contains(key)) return std::string("merge event lacks '") + key + "'";
  return {};
}

}  // namespace mixsbm
