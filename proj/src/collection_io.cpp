#include "mixsbm/collection_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mixsbm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw IoError(source + ":" + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

Network build(Vertex n, const std::vector<Edge>& edges,
              const std::string& source, std::size_t line) {
  try {
    return Network(n, edges);
  } catch (const NetworkError& e) {
    fail(source, line, e.what());
  }
}

}  // namespace

CollectionFormat parse_collection_format(const std::string& name) {
  if (name == "edge-list-dir" || name == "edges") return CollectionFormat::EdgeListDir;
  if (name == "ndjson") return CollectionFormat::Ndjson;
  throw IoError("unknown collection format '" + name + "'");
}

std::string to_string(CollectionFormat format) {
  return format == CollectionFormat::EdgeListDir ? "edge-list-dir" : "ndjson";
}

Network parse_edge_list(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  long long n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (blank(line)) continue;
    std::istringstream ss(line);
    if (n < 0) {
      std::string extra;
      if (!(ss >> n) || n <= 0 || (ss >> extra))
        fail(source, lineno, "expected a positive vertex count");
      continue;
    }
    long long i = 0;
    long long j = 0;
    std::string extra;
    if (!(ss >> i >> j) || (ss >> extra))
      fail(source, lineno, "expected 'i j'");
    if (i < 0 || j < 0 || i >= n || j >= n)
      fail(source, lineno, "vertex index out of range");
    if (i == j) fail(source, lineno, "self-loop on vertex " + std::to_string(i));
    edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  }
  if (n < 0) fail(source, lineno, "missing vertex count");
  return build(static_cast<Vertex>(n), edges, source, lineno);
}

void write_edge_list(std::ostream& out, const Network& network) {
  out << network.size() << '\n';
  for (const auto& [i, j] : network.edges()) out << i << ' ' << j << '\n';
}

NetworkCollection load_collection(const fs::path& path,
                                  CollectionFormat format) {
  NetworkCollection c;
  if (!fs::exists(path)) throw IoError(path.string() + ": no such file or directory");

  if (format == CollectionFormat::EdgeListDir) {
    if (!fs::is_directory(path)) throw IoError(path.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".edges")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw IoError(f.string() + ": cannot open");
      c.networks.push_back(parse_edge_list(in, f.string()));
      c.ids.push_back(f.stem().string());
    }
  } else {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open");
    std::string line;
    std::size_t lineno = 0;
    bool any_id = false;
    std::vector<std::optional<std::string>> ids;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(path.string(), lineno, std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
        fail(path.string(), lineno, "object with integer 'n' expected");
      const auto n = j["n"].get<long long>();
      if (n <= 0) fail(path.string(), lineno, "vertex count must be positive");
      std::vector<Edge> edges;
      if (j.contains("edges")) {
        if (!j["edges"].is_array()) fail(path.string(), lineno, "'edges' must be an array");
        for (const auto& e : j["edges"]) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
              !e[1].is_number_integer())
            fail(path.string(), lineno, "edge must be [i, j]");
          const auto s = e[0].get<long long>();
          const auto t = e[1].get<long long>();
          if (s < 0 || t < 0 || s >= n || t >= n)
            fail(path.string(), lineno, "vertex index out of range");
          if (s == t) fail(path.string(), lineno, "self-loop on vertex " + std::to_string(s));
          edges.emplace_back(static_cast<Vertex>(s), static_cast<Vertex>(t));
        }
      }
      c.networks.push_back(build(static_cast<Vertex>(n), edges, path.string(), lineno));
      if (j.contains("id") && j["id"].is_string()) {
        ids.emplace_back(j["id"].get<std::string>());
        any_id = true;
      } else {
        ids.emplace_back(std::nullopt);
      }
    }
    if (any_id)
      for (std::size_t m = 0; m < ids.size(); ++m)
        c.ids.push_back(ids[m].value_or(std::to_string(m)));
  }

  if (c.networks.empty()) throw IoError(path.string() + ": empty collection");
  return c;
}

void save_collection(const NetworkCollection& collection, const fs::path& path,
                     CollectionFormat format) {
  if (format == CollectionFormat::EdgeListDir) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError(path.string() + ": " + ec.message());
    const int width = static_cast<int>(std::to_string(collection.size()).size());
    for (std::size_t m = 0; m < collection.size(); ++m) {
      std::string stem = collection.ids.empty() ? std::string() : collection.ids[m];
      if (stem.empty()) {
        std::ostringstream ss;
        ss << std::setw(width) << std::setfill('0') << m;
        stem = ss.str();
      }
      const auto file = path / (stem + ".edges");
      std::ofstream out(file);
      if (!out) throw IoError(file.string() + ": cannot write");
      write_edge_list(out, collection.networks[m]);
      if (!out) throw IoError(file.string() + ": write failed");
    }
    return;
  }

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot write");
  for (std::size_t m = 0; m < collection.size(); ++m) {
    json j;
    if (!collection.ids.empty()) j["id"] = collection.ids[m];
    j["n"] = collection.networks[m].size();
    json edges = json::array();
    for (const auto& [s, t] : collection.networks[m].edges()) edges.push_back({s, t});
    j["edges"] = std::move(edges);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

std::size_t duplicate_edges(const NetworkCollection& collection) {
  std::size_t total = 0;
  for (const auto& n : collection.networks) total += n.duplicates();
  return total;
}

}  // namespace mixsbm
