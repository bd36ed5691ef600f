#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mixsbm/network.hpp"

namespace mixsbm {

enum class CollectionFormat { EdgeListDir, Ndjson };

CollectionFormat parse_collection_format(const std::string& name);
std::string to_string(CollectionFormat format);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a collection.
///
/// edge-list-dir: every `*.edges` file in the directory, ordered by filename;
///   `#` starts a comment; the first non-blank line is the vertex count,
///   then one `i j` pair per
///   line (0-based, edge i -> j). The file stem becomes the network id.
/// ndjson: one object `{"id": ..., "n": ..., "edges": [[i, j], ...]}` per
///   line, in file order. `id` is optional.
///
/// Parse errors carry `file:line`. Self-loops and out-of-range vertices are
/// errors; duplicate edges are dropped and counted (see `duplicate_edges`).
NetworkCollection load_collection(const std::filesystem::path& path,
                                  CollectionFormat format);

/// Writes a collection so that `load_collection` returns it unchanged. For
/// edge-list-dir the files are named after the ids (or a zero-padded index
/// when the collection has none), so ids must sort in collection order for
/// the order to survive.
void save_collection(const NetworkCollection& collection,
                     const std::filesystem::path& path,
                     CollectionFormat format);

Network parse_edge_list(std::istream& in, const std::string& source);
void write_edge_list(std::ostream& out, const Network& network);

std::size_t duplicate_edges(const NetworkCollection& collection);

}  // namespace mixsbm
