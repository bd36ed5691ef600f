#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "mixsbm/collection_io.hpp"
#include "mixsbm/output.hpp"
#include "oracles.hpp"

using namespace mixsbm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixsbm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_collection(const fs::path& dir, int M, std::uint64_t seed) {
  Rng rng(seed);
  NetworkCollection c;
  for (int m = 0; m < M; ++m) {
    c.networks.push_back(sample_network(oracle::random_params(1 + m % 2, rng), 12, rng).network);
    c.ids.push_back("net" + std::to_string(m));
  }
  save_collection(c, dir / "nets", CollectionFormat::EdgeListDir);
  return dir / "nets";
}

fs::path write_params(const fs::path& p, const SbmParams& params) {
  std::ofstream(p) << to_json(params).dump();
  return p;
}

std::string scenario(const std::string& name) {
  return std::string(MIXSBM_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

}  // namespace

TEST_CASE("fit warns about duplicate edges") {
  const fs::path dir = fresh("dup");
  fs::create_directories(dir / "nets");
  std::ofstream(dir / "nets" / "a.edges") << "4\n0 1\n0 1\n2 3\n";
  const Run r = run({"fit", (dir / "nets").string(), "--out-dir", (dir / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("1 duplicate edge") != std::string::npos);
}

TEST_CASE("fit on a single network") {
  const fs::path dir = fresh("single");
  const auto nets = write_collection(dir, 1, 1);
  const Run r = run({"fit", nets.string(), "--out-dir", (dir / "out").string(), "--validate"});
  REQUIRE(r.code == 0);
  const json c = json::parse(slurp(dir / "out" / "clustering.json"));
  CHECK(validate_clustering_json(c).empty());
  CHECK(c["clusters"].size() == 1);
  const json d = json::parse(slurp(dir / "out" / "dendrogram.json"));
  CHECK(d["merges"].empty());
  CHECK(slurp(dir / "out" / "merge_trace.tsv") == "step\tc1\tc2\tdelta\ticl_after\tC\n");
  CHECK(slurp(dir / "out" / "dendrogram.nwk") == "net0;\n");
}

TEST_CASE("force-merge-all on five networks") {
  const fs::path dir = fresh("force");
  const auto nets = write_collection(dir, 5, 2);
  const Run r = run({"--verify", "fit", nets.string(), "--out-dir", (dir / "out").string(),
                     "--force-merge-all", "--validate"});
  REQUIRE(r.code == 0);
  const json d = json::parse(slurp(dir / "out" / "dendrogram.json"));
  CHECK(d["merges"].size() == 4);
  const std::string nwk = slurp(dir / "out" / "dendrogram.nwk");
  CHECK(std::count(nwk.begin(), nwk.end(), '(') == 4);
  for (int m = 0; m < 5; ++m) CHECK(nwk.find("net" + std::to_string(m)) != std::string::npos);
  std::istringstream trace(slurp(dir / "out" / "merge_trace.tsv"));
  std::string line;
  int rows = 0;
  while (std::getline(trace, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("same seed, same bytes") {
  const fs::path dir = fresh("determinism");
  const auto nets = write_collection(dir, 8, 3);
  for (const char* name : {"a", "b"})
    REQUIRE(run({"--seed", "5", "--threads", name[0] == 'a' ? "1" : "4", "fit", nets.string(),
                 "--out-dir", (dir / name).string()})
                .code == 0);
  for (const char* f : {"clustering.json", "dendrogram.json", "dendrogram.nwk", "merge_trace.tsv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}

TEST_CASE("config file fills unset flags, flags win") {
  const fs::path dir = fresh("config");
  const auto nets = write_collection(dir, 6, 4);
  std::ofstream(dir / "run.cfg") << "# priors\nlambda = 5\nalpha=2\n";
  auto icl_of = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"fit", nets.string(), "--out-dir", (dir / "o").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const Run r = run(args);
    REQUIRE(r.code == 0);
    return json::parse(slurp(dir / "o" / "clustering.json"))["icl"].get<double>();
  };
  const double plain = icl_of({});
  const double configured = icl_of({"--config", (dir / "run.cfg").string()});
  const double overridden =
      icl_of({"--config", (dir / "run.cfg").string(), "--lambda", "1", "--alpha", "1"});
  CHECK(configured != plain);
  CHECK(overridden == plain);
  CHECK(icl_of({"--lambda", "5", "--alpha", "2"}) == configured);

  std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
  CHECK(run({"fit", nets.string(), "--config", (dir / "bad.cfg").string()}).code == 2);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh("codes");
  CHECK(run({}).code == 2);
  CHECK(run({"fit"}).code == 2);
  CHECK(run({"fit", "x", "--alpha", "-1"}).code == 2);
  CHECK(run({"fit", "x", "--bogus"}).code == 2);
  CHECK(run({"fit", (dir / "missing").string()}).code == 1);
  CHECK(run({"--help"}).code == 0);
  std::ofstream(dir / "bad.json") << "{\"components\": []}";
  CHECK(run({"simulate", (dir / "bad.json").string()}).code == 2);
  std::ofstream(dir / "junk.json") << "not json";
  CHECK(run({"simulate", (dir / "junk.json").string()}).code == 2);
  CHECK(run({"bench", scenario("four_component"), "--method", "gsc"}).code == 2);
  CHECK(run({"bench", scenario("four_component"), "--method", "nope"}).code == 2);
}

TEST_CASE("simulate writes collection and truth") {
  const fs::path dir = fresh("simulate");
  for (const char* format : {"edge-list-dir", "ndjson"}) {
    const fs::path out = dir / format;
    REQUIRE(run({"--seed", "3", "simulate", scenario("single_component"), "--out-dir", out.string(),
                 "--format", format})
                .code == 0);
    const json truth = json::parse(slurp(out / "truth.json"));
    CHECK(truth["U"].size() == 50);
    CHECK(truth["components"].size() == 1);
    const auto coll =
        load_collection(std::string(format) == "ndjson" ? out / "collection.ndjson"
                                                        : out / "networks",
                        parse_collection_format(format));
    CHECK(coll.size() == 50);
    CHECK(coll.ids == truth["ids"].get<std::vector<std::string>>());
  }
}

TEST_CASE("bench rows") {
  const fs::path dir = fresh("bench");
  json s = json::parse(slurp(scenario("four_component")));
  s["counts"] = {2, 2, 2, 2};
  s["sizes"] = {{"law", "uniform"}, {"min", 20}, {"max", 30}};
  std::ofstream(dir / "tiny.json") << s.dump();
  const Run one = run({"bench", (dir / "tiny.json").string(), "--replicates", "1"});
  REQUIRE(one.code == 0);
  CHECK(std::count(one.out.begin(), one.out.end(), '\n') == 2);
  const Run both = run({"bench", (dir / "tiny.json").string(), "--replicates", "2", "--method",
                        "hier", "--method", "gsc", "--c-target", "4"});
  REQUIRE(both.code == 0);
  std::istringstream rows(both.out);
  std::string line;
  std::getline(rows, line);
  std::vector<std::string> methods;
  while (std::getline(rows, line)) methods.push_back(line.substr(line.find('\t') + 1, 3));
  CHECK(methods == std::vector<std::string>{"hie", "hie", "gsc", "gsc"});
}

TEST_CASE("dist") {
  const fs::path dir = fresh("dist");
  Rng rng(9);
  const SbmParams p = oracle::random_params(3, rng);
  const auto a = write_params(dir / "a.json", p);
  const auto b = write_params(dir / "b.json", p.permuted(BlockPermutation{{2, 0, 1}}));
  const auto c05 = write_params(
      dir / "c.json", SbmParams{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, 0.5)});
  const auto c03 = write_params(
      dir / "d.json", SbmParams{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, 0.3)});
  const Run r = run({"dist", a.string(), b.string(), c05.string(), c03.string()});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "file\ta.json\tb.json\tc.json\td.json");
  std::vector<std::vector<double>> d;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string name;
    row >> name;
    d.emplace_back(std::istream_iterator<double>(row), std::istream_iterator<double>());
  }
  REQUIRE(d.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(d[i][i] == 0.0);
  CHECK(d[0][1] == 0.0);
  CHECK(d[2][3] == doctest::Approx(0.2));

  std::ofstream(dir / "bad.json") << R"({"pi": [0.5, 0.6], "gamma": [[0,0],[0,0]]})";
  CHECK(run({"dist", a.string(), (dir / "bad.json").string()}).code == 2);
  CHECK(run({"dist", (dir / "none.json").string()}).code == 2);
}
