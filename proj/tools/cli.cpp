#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mixsbm/collection_io.hpp"
#include "mixsbm/eval.hpp"
#include "mixsbm/graphon.hpp"
#include "mixsbm/init.hpp"
#include "mixsbm/mixture.hpp"
#include "mixsbm/output.hpp"
#include "mixsbm/parallel.hpp"

namespace mixsbm::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for problems with the command line or its input descriptions.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string config;
  bool verify = false;
};

struct ModelFlags {
  Hyperparams hyper;
  InitConfig init;
  long long match_budget = kDefaultMatchBudget;
};

void add_model_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--alpha", f.hyper.alpha, "Dirichlet prior on block proportions")
      ->capture_default_str();
  sub->add_option("--eta", f.hyper.eta, "Beta prior, edge pseudo-count")->capture_default_str();
  sub->add_option("--zeta", f.hyper.zeta, "Beta prior, non-edge pseudo-count")
      ->capture_default_str();
  sub->add_option("--lambda", f.hyper.lambda, "Dirichlet prior on cluster proportions")
      ->capture_default_str();
  sub->add_option("--k-min", f.init.k_min, "Smallest block count tried per network")
      ->capture_default_str();
  sub->add_option("--k-max", f.init.k_max, "Largest block count per network (0: min(6, n/3))")
      ->capture_default_str();
  sub->add_option("--restarts", f.init.restarts, "Random restarts per block count")
      ->capture_default_str();
  sub->add_option("--match-budget", f.match_budget,
                  "Largest K1!*K2! searched exhaustively when matching blocks")
      ->capture_default_str();
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(path + ": cannot open config file");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// Config values fill options the command line left unset.
void apply_config(CLI::App& app, CLI::App* active, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    CLI::Option* opt = nullptr;
    if (active) opt = active->get_option_no_throw("--" + key);
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt || key == "config") throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw IoError(path.string() + ": cannot write");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  return json::parse(in);
}

MergeOptions merge_options(const Global& g, const ModelFlags& f) {
  MergeOptions m;
  m.match_budget = f.match_budget;
  m.seed = g.seed;
  m.threads = resolve_threads(g.threads);
  m.verify = g.verify;
  return m;
}

InitConfig init_config(const Global& g, const ModelFlags& f) {
  InitConfig c = f.init;
  c.seed = g.seed;
  c.threads = resolve_threads(g.threads);
  return c;
}

void check_model_flags(const ModelFlags& f) {
  try {
    f.hyper.validate();
    f.init.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (f.match_budget < 1) throw UsageError("--match-budget must be positive");
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string format = "edge-list-dir";
  std::string out_dir = ".";
  bool force_merge_all = false;
  bool validate = false;
};

int cmd_fit(const Global& g, const ModelFlags& f, const FitArgs& a, std::ostream& out,
            std::ostream& err) {
  check_model_flags(f);
  CollectionFormat format;
  try {
    format = parse_collection_format(a.format);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const NetworkCollection collection = load_collection(a.input, format);
  if (const std::size_t dup = duplicate_edges(collection); dup > 0)
    err << "warning: " << dup << " duplicate edge(s) collapsed\n";
  const auto init = init_collection(collection, f.hyper, init_config(g, f));
  FitOptions fo;
  fo.merge = merge_options(g, f);
  fo.force_merge_all = a.force_merge_all;
  const FitResult result = fit(collection, f.hyper, init, fo);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_file(dir / "clustering.json", clustering_to_json(result.state).dump(2) + "\n");
  write_file(dir / "dendrogram.json", dendrogram_to_json(result.dendrogram).dump(2) + "\n");
  write_file(dir / "dendrogram.nwk", dendrogram_newick(result.dendrogram) + "\n");
  write_file(dir / "merge_trace.tsv", merge_trace_tsv(result.dendrogram));

  if (a.validate) {
    std::string problem = validate_clustering_json(read_json_file(dir / "clustering.json"));
    if (problem.empty())
      problem = validate_dendrogram_json(read_json_file(dir / "dendrogram.json"));
    if (!problem.empty()) throw std::runtime_error("output validation failed: " + problem);
  }
  out << "networks\t" << collection.size() << "\nclusters\t" << result.state.C << "\nicl\t";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", result.state.icl);
  out << buf << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string out_dir = ".";
  std::string format = "edge-list-dir";
  std::uint64_t replicate = 0;
};

Scenario load_scenario_or_usage(const std::string& path) {
  try {
    return load_scenario(path);
  } catch (const SbmError& e) {
    throw UsageError(e.what());
  }
}

int cmd_simulate(const Global& g, bool seed_given, const SimulateArgs& a, std::ostream& out) {
  Scenario scenario = load_scenario_or_usage(a.scenario);
  if (seed_given) scenario.seed = g.seed;
  CollectionFormat format;
  try {
    format = parse_collection_format(a.format);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const SimulatedData data = simulate(scenario, a.replicate);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const fs::path target =
      format == CollectionFormat::Ndjson ? dir / "collection.ndjson" : dir / "networks";
  save_collection(data.collection, target, format);

  json truth;
  truth["scenario"] = scenario.name;
  truth["replicate"] = a.replicate;
  truth["ids"] = data.collection.ids;
  truth["U"] = data.U;
  json labels = json::object();
  for (std::size_t m = 0; m < data.labels.size(); ++m)
    labels[data.collection.ids[m]] = data.labels[m];
  truth["labels"] = std::move(labels);
  json comps = json::array();
  for (const auto& p : data.component_params) comps.push_back(to_json(p));
  truth["components"] = std::move(comps);
  truth["outliers"] = data.outlier_indices;
  write_file(dir / "truth.json", truth.dump(2) + "\n");
  write_file(dir / "scenario.json", to_json(scenario).dump(2) + "\n");
  out << "networks\t" << data.collection.size() << "\ncollection\t" << target.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string scenario;
  std::vector<std::string> methods{"hier"};
  int replicates = 1;
  int c_target = 0;
  std::string out;
};

int cmd_bench(const Global& g, bool seed_given, const ModelFlags& f, const BenchArgs& a,
              std::ostream& out) {
  check_model_flags(f);
  std::vector<Method> methods;
  for (const auto& name : a.methods) {
    try {
      methods.push_back(parse_method(name));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    if (methods.back() == Method::Gsc && a.c_target < 1)
      throw UsageError("method gsc requires --c-target");
  }
  if (a.replicates < 0) throw UsageError("--replicates must be >= 0");
  Scenario scenario = load_scenario_or_usage(a.scenario);
  if (seed_given) scenario.seed = g.seed;

  ExperimentConfig cfg;
  cfg.hyper = f.hyper;
  cfg.init = init_config(g, f);
  cfg.merge = merge_options(g, f);
  cfg.c_target = a.c_target;
  std::ostringstream report;
  report << report_header();
  for (Method method : methods)
    for (const auto& row : run_experiment(scenario, method, a.replicates, cfg))
      report << report_line(row);
  if (a.out.empty()) {
    out << report.str();
  } else {
    write_file(a.out, report.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DistArgs {
  std::vector<std::string> files;
  std::string out;
  long long match_budget = kDefaultMatchBudget;
};

int cmd_dist(const DistArgs& a, std::ostream& out) {
  if (a.match_budget < 1) throw UsageError("--match-budget must be positive");
  std::vector<SbmParams> params;
  for (const auto& file : a.files) {
    try {
      SbmParams p = params_from_json(read_json_file(file));
      p.validate();
      params.push_back(std::move(p));
    } catch (const IoError& e) {
      throw UsageError(e.what());
    } catch (const std::exception& e) {
      throw UsageError(file + ": malformed parameters: " + e.what());
    }
  }
  const std::size_t n = params.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i * n + j] = d[j * n + i] = match_blocks(params[i], params[j], a.match_budget).distance;
  std::ostringstream tsv;
  tsv << "file";
  for (const auto& file : a.files) tsv << '\t' << fs::path(file).filename().string();
  tsv << '\n';
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    tsv << fs::path(a.files[i]).filename().string();
    for (std::size_t j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.10g", d[i * n + j]);
      tsv << '\t' << buf;
    }
    tsv << '\n';
  }
  if (a.out.empty()) {
    out << tsv.str();
  } else {
    write_file(a.out, tsv.str());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustering of network collections with a mixture of stochastic block models",
               "mixsbm"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--config", g.config, "Plain-text key = value file; flags win");
  app.add_flag("--verify", g.verify, "Recompute statistics and gains from scratch after merges");

  ModelFlags fit_model;
  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Cluster a collection of networks");
  fit_cmd->add_option("input", fit_args.input, "Collection directory or NDJSON file")
      ->required();
  fit_cmd->add_option("--format", fit_args.format, "edge-list-dir or ndjson")
      ->capture_default_str();
  fit_cmd->add_option("--out-dir", fit_args.out_dir, "Directory for the output files")
      ->capture_default_str();
  fit_cmd->add_flag("--force-merge-all", fit_args.force_merge_all,
                    "Keep merging until one cluster remains");
  fit_cmd->add_flag("--validate", fit_args.validate, "Re-read and check the written outputs");
  add_model_flags(fit_cmd, fit_model);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a collection from a scenario file");
  sim_cmd->add_option("scenario", sim_args.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out-dir", sim_args.out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--format", sim_args.format, "edge-list-dir or ndjson")
      ->capture_default_str();
  sim_cmd->add_option("--replicate", sim_args.replicate, "Replicate index")
      ->capture_default_str();

  ModelFlags bench_model;
  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Run methods on simulated replicates");
  bench_cmd->add_option("scenario", bench_args.scenario, "Scenario JSON")->required();
  bench_cmd->add_option("--method", bench_args.methods, "hier, hier-force-merge-all or gsc")
      ->capture_default_str();
  bench_cmd->add_option("--replicates", bench_args.replicates, "Number of replicates")
      ->capture_default_str();
  bench_cmd->add_option("--c-target", bench_args.c_target, "Cluster count given to gsc");
  bench_cmd->add_option("--out", bench_args.out, "Report TSV (default: stdout)");
  add_model_flags(bench_cmd, bench_model);

  DistArgs dist_args;
  auto* dist_cmd = app.add_subcommand("dist", "Matched graphon distances between SBM parameters");
  dist_cmd->add_option("files", dist_args.files, "SBM parameter JSON files")->required();
  dist_cmd->add_option("--out", dist_args.out, "Output TSV (default: stdout)");
  dist_cmd->add_option("--match-budget", dist_args.match_budget,
                       "Largest K1!*K2! searched exhaustively")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    CLI::App* active = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (!g.config.empty()) apply_config(app, active, read_config(g.config));
    if (g.threads < 0) throw UsageError("--threads must be >= 0");
    const bool seed_given = seed_opt->count() > 0;
    if (active == fit_cmd) return cmd_fit(g, fit_model, fit_args, out, err);
    if (active == sim_cmd) return cmd_simulate(g, seed_given, sim_args, out);
    if (active == bench_cmd) return cmd_bench(g, seed_given, bench_model, bench_args, out);
    if (active == dist_cmd) return cmd_dist(dist_args, out);
    return kExitUsage;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mixsbm: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "mixsbm: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mixsbm: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mixsbm::cli
