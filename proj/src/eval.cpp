#include "mixsbm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "mixsbm/parallel.hpp"

namespace mixsbm {
using nlohmann::json;

double adjusted_rand_index(const std::vector<int>& u, const std::vector<int>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("partitions differ in length");
  const double n = static_cast<double>(u.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < u.size(); ++i) {
    joint[{u[i], v[i]}] += 1;
    rows[u[i]] += 1;
    cols[v[i]] += 1;
  }
  auto pairs = [](double x) { return x * (x - 1) / 2; };
  double index = 0;
  for (const auto& [key, c] : joint) index += pairs(c);
  double a = 0;
  for (const auto& [key, c] : rows) a += pairs(c);
  double b = 0;
  for (const auto& [key, c] : cols) b += pairs(c);
  const double total = pairs(n);
  if (total <= 0) return 1.0;
  const double expected = a * b / total;
  const double max_index = (a + b) / 2;
  if (max_index - expected == 0.0) return 1.0;
  return (index - expected) / (max_index - expected);
}

double weighted_label_ari(const std::vector<Labels>& estimated, const std::vector<Labels>& truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("label sets differ in size");
  double num = 0;
  double den = 0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const double w = static_cast<double>(truth[m].size());
    num += w * adjusted_rand_index(estimated[m], truth[m]);
    den += w;
  }
  return den > 0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Scenarios

void Scenario::validate() const {
  if (components.empty() && outliers() == 0) throw SbmError("scenario has no components");
  double w = 0;
  for (const auto& c : components) {
    c.params.validate();
    if (c.weight < 0) throw SbmError("negative component weight");
    w += c.weight;
  }
  if (!components.empty() && counts.empty() && std::abs(w - 1.0) > 1e-9)
    throw SbmError("component weights must sum to 1");
  if (!counts.empty() && counts.size() != components.size())
    throw SbmError("one count per component required");
  if (outlier_fraction < 0 || outlier_fraction >= 1)
    throw SbmError("outlier fraction must be in [0, 1)");
  if (outlier_k_min < 1 || outlier_k_max < outlier_k_min)
    throw SbmError("bad outlier block range");
  switch (size_law) {
    case SizeLaw::Fixed:
      if (n_fixed < 1) throw SbmError("network size must be positive");
      break;
    case SizeLaw::Uniform:
      if (n_min < 1 || n_max < n_min) throw SbmError("bad size range");
      break;
    case SizeLaw::List:
      if (n_list.empty()) throw SbmError("empty size list");
      break;
  }
  if (total_networks() < 1) throw SbmError("scenario has no networks");
}

int Scenario::outliers() const {
  if (outlier_count >= 0) return outlier_count;
  const int base = counts.empty() ? M : std::accumulate(counts.begin(), counts.end(), 0);
  if (counts.empty()) return static_cast<int>(std::lround(outlier_fraction * M));
  // fraction of the final total: o = f (base + o)
  return static_cast<int>(std::lround(outlier_fraction * base / (1 - outlier_fraction)));
}

int Scenario::total_networks() const {
  if (counts.empty()) return M;
  return std::accumulate(counts.begin(), counts.end(), 0) + outliers();
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    for (const auto& c : j.at("components")) {
      ScenarioComponent comp;
      comp.weight = c.value("weight", 1.0);
      comp.params = params_from_json(c);
      s.components.push_back(std::move(comp));
    }
    if (j.contains("counts")) s.counts = j["counts"].get<std::vector<int>>();
    s.M = j.value("M", s.M);
    if (j.contains("sizes")) {
      const auto& z = j["sizes"];
      const std::string law = z.value("law", "fixed");
      if (law == "fixed") {
        s.size_law = SizeLaw::Fixed;
        s.n_fixed = z.at("n").get<Vertex>();
      } else if (law == "uniform") {
        s.size_law = SizeLaw::Uniform;
        s.n_min = z.at("min").get<Vertex>();
        s.n_max = z.at("max").get<Vertex>();
      } else if (law == "list") {
        s.size_law = SizeLaw::List;
        s.n_list = z.at("values").get<std::vector<Vertex>>();
      } else {
        throw SbmError("unknown size law '" + law + "'");
      }
    }
    if (j.contains("outliers")) {
      const auto& o = j["outliers"];
      s.outlier_fraction = o.value("fraction", 0.0);
      s.outlier_count = o.value("count", -1);
      s.outlier_k_min = o.value("k_min", s.outlier_k_min);
      s.outlier_k_max = o.value("k_max", s.outlier_k_max);
    }
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw SbmError(std::string("malformed scenario: ") + e.what());
  }
  if (s.components.size() == 1 && !j.at("components")[0].contains("weight"))
    s.components[0].weight = 1.0;
  s.validate();
  return s;
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  json comps = json::array();
  for (const auto& c : s.components) {
    json cj = to_json(c.params);
    cj["weight"] = c.weight;
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  if (!s.counts.empty()) j["counts"] = s.counts;
  j["M"] = s.M;
  switch (s.size_law) {
    case SizeLaw::Fixed: j["sizes"] = {{"law", "fixed"}, {"n", s.n_fixed}}; break;
    case SizeLaw::Uniform: j["sizes"] = {{"law", "uniform"}, {"min", s.n_min}, {"max", s.n_max}}; break;
    case SizeLaw::List: j["sizes"] = {{"law", "list"}, {"values", s.n_list}}; break;
  }
  j["outliers"] = {{"fraction", s.outlier_fraction},
                   {"count", s.outlier_count},
                   {"k_min", s.outlier_k_min},
                   {"k_max", s.outlier_k_max}};
  j["seed"] = s.seed;
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SbmError(path.string() + ": cannot open scenario");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SbmError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

namespace {

SbmParams random_params(int K, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SbmParams p{Eigen::VectorXd(K), Eigen::MatrixXd(K, K)};
  for (int k = 0; k < K; ++k) p.pi(k) = expo(rng);
  p.pi /= p.pi.sum();
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) p.gamma(k, l) = unif(rng);
  return p;
}

}  // namespace

SimulatedData simulate(const Scenario& scenario, std::uint64_t replicate) {
  scenario.validate();
  Rng rng(mix_seed({scenario.seed, replicate}));
  const int C = static_cast<int>(scenario.components.size());
  const int n_out = scenario.outliers();

  std::vector<int> assignment;
  if (!scenario.counts.empty()) {
    for (int c = 0; c < C; ++c) assignment.insert(assignment.end(), scenario.counts[c], c);
  } else {
    std::vector<double> w;
    for (const auto& comp : scenario.components) w.push_back(comp.weight);
    const int regular = scenario.M - n_out;
    if (regular > 0) {
      std::discrete_distribution<int> pick(w.begin(), w.end());
      for (int m = 0; m < regular; ++m) assignment.push_back(pick(rng));
    }
  }
  for (int t = 0; t < n_out; ++t) assignment.push_back(C + t);
  std::shuffle(assignment.begin(), assignment.end(), rng);

  SimulatedData data;
  for (const auto& comp : scenario.components) data.component_params.push_back(comp.params);
  std::uniform_int_distribution<Vertex> size_draw(scenario.n_min, scenario.n_max);
  std::uniform_int_distribution<int> k_draw(scenario.outlier_k_min, scenario.outlier_k_max);
  const int width = static_cast<int>(std::to_string(assignment.size()).size());
  for (std::size_t m = 0; m < assignment.size(); ++m) {
    Vertex n = scenario.n_fixed;
    if (scenario.size_law == SizeLaw::Uniform) n = size_draw(rng);
    if (scenario.size_law == SizeLaw::List) n = scenario.n_list[m % scenario.n_list.size()];
    const int u = assignment[m];
    SbmParams params;
    if (u < C) {
      params = scenario.components[u].params;
    } else {
      params = random_params(k_draw(rng), rng);
      data.outlier_indices.push_back(static_cast<int>(m));
    }
    SampledNetwork s = sample_network(params, n, rng);
    data.collection.networks.push_back(std::move(s.network));
    char id[32];
    std::snprintf(id, sizeof id, "net%0*zu", width, m);
    data.collection.ids.emplace_back(id);
    data.U.push_back(u);
    data.labels.push_back(std::move(s.labels));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Graphon spectral clustering

Eigen::MatrixXd gaussian_similarity(const Eigen::MatrixXd& d) {
  const auto M = d.rows();
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = i + 1; j < M; ++j)
      if (d(i, j) > 0) nonzero.push_back(d(i, j));
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(M, M);
  if (nonzero.empty()) return w;
  std::sort(nonzero.begin(), nonzero.end());
  const std::size_t h = nonzero.size();
  const double bw = h % 2 ? nonzero[h / 2] : 0.5 * (nonzero[h / 2 - 1] + nonzero[h / 2]);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j)
      if (i != j) w(i, j) = std::exp(-d(i, j) * d(i, j) / (2 * bw * bw));
  return w;
}

std::vector<int> kmeans(const Eigen::MatrixXd& x, int k, int restarts, int max_iterations,
                        Rng& rng) {
  const auto n = x.rows();
  if (k < 1 || k > n) throw std::invalid_argument("k-means needs 1 <= k <= number of points");
  std::vector<int> best_labels(n, 0);
  double best_inertia = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);

  for (int run = 0; run < restarts; ++run) {
    Eigen::MatrixXd centers(k, x.cols());
    centers.row(0) = x.row(first(rng));
    Eigen::VectorXd dist2(n);
    for (Eigen::Index i = 0; i < n; ++i) dist2(i) = (x.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double total = dist2.sum();
      Eigen::Index pick = first(rng);
      if (total > 0) {
        double target = unif(rng) * total;
        for (pick = 0; pick < n - 1; ++pick) {
          target -= dist2(pick);
          if (target < 0) break;
        }
      }
      centers.row(c) = x.row(pick);
      for (Eigen::Index i = 0; i < n; ++i)
        dist2(i) = std::min(dist2(i), (x.row(i) - centers.row(c)).squaredNorm());
    }

    std::vector<int> labels(n, -1);
    double inertia = 0;
    for (int it = 0; it < max_iterations; ++it) {
      bool changed = false;
      inertia = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double dd = (x.row(i) - centers.row(c)).squaredNorm();
          if (dd < bd) {
            bd = dd;
            arg = c;
          }
        }
        if (labels[i] != arg) changed = true;
        labels[i] = arg;
        inertia += bd;
      }
      if (!changed && it > 0) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
      std::vector<int> counts(k, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += x.row(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
          centers.row(c) = sums.row(c) / counts[c];
        } else {
          // Re-seed an empty center at the point farthest from its center.
          Eigen::Index far = 0;
          double fd = -1;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double dd = (x.row(i) - centers.row(labels[i])).squaredNorm();
            if (dd > fd) {
              fd = dd;
              far = i;
            }
          }
          centers.row(c) = x.row(far);
        }
      }
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

GscResult gsc_baseline(const std::vector<SbmParams>& per_network, int c_target,
                       const GscOptions& options) {
  if (c_target < 1) throw std::invalid_argument("GSC needs a positive target cluster count");
  const auto M = static_cast<Eigen::Index>(per_network.size());
  GscResult result;
  result.labels.assign(M, 0);
  if (M == 0) return result;

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = i + 1; j < M; ++j)
      d(i, j) = d(j, i) =
          match_blocks(per_network[i], per_network[j], options.match_budget).distance;
  if (d.maxCoeff() <= 0.0) {
    result.warning = "all graphon distances are zero; returning a single cluster";
    return result;
  }
  const int k = std::min<int>(c_target, static_cast<int>(M));
  const Eigen::MatrixXd w = gaussian_similarity(d);
  Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::VectorXd inv_sqrt(M);
  for (Eigen::Index i = 0; i < M; ++i) inv_sqrt(i) = deg(i) > 0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  const Eigen::MatrixXd normalized = inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
  // Eigenvalues ascend; the top k of the normalized affinity are the bottom k
  // of the symmetric Laplacian I - D^-1/2 W D^-1/2.
  Eigen::MatrixXd emb = eig.eigenvectors().rightCols(k);
  for (Eigen::Index i = 0; i < M; ++i) {
    const double norm = emb.row(i).norm();
    if (norm > 0) emb.row(i) /= norm;
  }
  Rng rng(mix_seed({options.seed, static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(k)}));
  result.labels = kmeans(emb, k, options.restarts, options.max_iterations, rng);
  std::vector<int> used(k, 0);
  for (int z : result.labels) used[z] = 1;
  if (std::count(used.begin(), used.end(), 1) < k)
    result.warning = "fewer than " + std::to_string(k) + " nonempty groups";
  return result;
}

// ---------------------------------------------------------------------------
// Experiments

Method parse_method(const std::string& name) {
  if (name == "hier") return Method::Hier;
  if (name == "hier-force-merge-all") return Method::HierForceMergeAll;
  if (name == "gsc") return Method::Gsc;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Hier: return "hier";
    case Method::HierForceMergeAll: return "hier-force-merge-all";
    case Method::Gsc: return "gsc";
  }
  return "?";
}

namespace {

double best_component_distance(const SbmParams& p, const std::vector<SbmParams>& truth,
                               long long budget) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& t : truth) {
    const double d = match_blocks(p, t, budget).distance;
    if (!(d >= best)) best = d;
  }
  return best;
}

int most_common(const std::vector<int>& values) {
  std::map<int, int> freq;
  for (int v : values) ++freq[v];
  int best = 0;
  int count = -1;
  for (const auto& [v, c] : freq)
    if (c > count) {
      count = c;
      best = v;
    }
  return best;
}

}  // namespace

ExperimentRow evaluate_method(const Scenario& scenario, const SimulatedData& data, Method method,
                              const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRow row;
  row.scenario = scenario.name;
  row.method = to_string(method);
  row.M = static_cast<int>(data.collection.size());
  {
    std::vector<int> u = data.U;
    std::sort(u.begin(), u.end());
    row.c_true = static_cast<int>(std::unique(u.begin(), u.end()) - u.begin());
  }
  const auto init = init_collection(data.collection, config.hyper, config.init);
  const long long budget = config.merge.match_budget;

  if (method == Method::Gsc) {
    if (config.c_target < 1) throw std::invalid_argument("gsc requires a target cluster count");
    std::vector<SbmParams> params;
    std::vector<Labels> labels;
    for (const auto& r : init) {
      params.push_back(r.params);
      labels.push_back(r.labels);
    }
    GscOptions gopt;
    gopt.match_budget = budget;
    gopt.seed = config.merge.seed;
    const GscResult g = gsc_baseline(params, config.c_target, gopt);
    std::vector<int> groups = g.labels;
    std::sort(groups.begin(), groups.end());
    row.c_hat = static_cast<int>(std::unique(groups.begin(), groups.end()) - groups.begin());
    row.ari_clusters = adjusted_rand_index(g.labels, data.U);
    row.ari_labels = weighted_label_ari(labels, data.labels);
    double sum = 0;
    for (const auto& p : params) sum += best_component_distance(p, data.component_params, budget);
    row.mean_graphon_dist = sum / static_cast<double>(params.size());
    const int largest = most_common(g.labels);
    std::vector<int> ks;
    for (std::size_t m = 0; m < init.size(); ++m)
      if (g.labels[m] == largest) ks.push_back(init[m].K);
    row.k_hat = most_common(ks);
  } else {
    FitOptions fo;
    fo.merge = config.merge;
    fo.force_merge_all = method == Method::HierForceMergeAll;
    const FitResult fit_result = fit(data.collection, config.hyper, init, fo);
    const ClusteringState& st = fit_result.state;
    row.c_hat = st.C;
    row.ari_clusters = adjusted_rand_index(st.U, data.U);
    std::vector<Labels> labels(data.collection.size());
    double dist_sum = 0;
    std::size_t largest = 0;
    for (const auto& c : st.clusters) {
      if (!c) continue;
      for (std::size_t t = 0; t < c->members.size(); ++t)
        labels[c->members[t]] = c->model.labels()[t];
      dist_sum += best_component_distance(c->params, data.component_params, budget);
      if (c->members.size() > largest) {
        largest = c->members.size();
        row.k_hat = c->K();
      }
    }
    row.ari_labels = weighted_label_ari(labels, data.labels);
    row.mean_graphon_dist = dist_sum / st.C;
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ExperimentRow> run_experiment(const Scenario& scenario, Method method,
                                          int replicates, const ExperimentConfig& config) {
  if (method == Method::Gsc && config.c_target < 1)
    throw std::invalid_argument("gsc requires a target cluster count");
  std::vector<ExperimentRow> rows(std::max(0, replicates));
  const int threads = resolve_threads(config.merge.threads);
  ExperimentConfig inner = config;
  if (threads > 1 && replicates > 1) {
    inner.merge.threads = 1;
    inner.init.threads = 1;
  }
  parallel_for(rows.size(), replicates > 1 ? threads : 1, [&](std::size_t r) {
    const SimulatedData data = simulate(scenario, r);
    rows[r] = evaluate_method(scenario, data, method, inner);
    rows[r].replicate = static_cast<int>(r);
  });
  return rows;
}

std::string report_header() {
  return "scenario\tmethod\treplicate\tM\tC_true\tC_hat\tari_clusters\tari_labels\t"
         "mean_graphon_dist\tseconds\tk_hat\n";
}

std::string report_line(const ExperimentRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s\t%s\t%d\t%d\t%d\t%d\t%.6f\t%.6f\t%.6f\t%.3f\t%d\n",
                r.scenario.c_str(), r.method.c_str(), r.replicate, r.M, r.c_true, r.c_hat,
                r.ari_clusters, r.ari_labels, r.mean_graphon_dist, r.seconds, r.k_hat);
  return buf;
}

}  // namespace mixsbm
