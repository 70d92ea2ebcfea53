#pragma once

#include <string>

#include "polyg/core/result.hpp"
#include "polyg/graph/store.hpp"

namespace polyg::graph {

// Binary graph snapshot for fast reload: magic "PLGS", a format version,
// the inverse hint, entities and the original (non-materialized) relations.
// A snapshot of a graph with materialized inverses records that fact and
// load_snapshot re-materializes with the default prefix, which reproduces
// the relation list exactly.
//
// load_snapshot rejects wrong magic bytes and unknown versions with a
// message telling the caller to re-ingest; truncated or corrupt files name
// the offset that failed.
Result<Ok> save_snapshot(const PropertyGraph& g, const std::string& path);
Result<PropertyGraph> load_snapshot(const std::string& path);

}  // namespace polyg::graph
