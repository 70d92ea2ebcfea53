#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/core/scalar.hpp"
#include "polyg/cypher/ast.hpp"
#include "polyg/graph/store.hpp"

namespace polyg::exec {

struct EntityRef {
    std::uint32_t index = 0;
    bool operator==(const EntityRef&) const = default;
};

struct RelationRef {
    std::uint32_t index = 0;
    bool operator==(const RelationRef&) const = default;
};

// Alternating entity/relation sequence; rels.size() + 1 == nodes.size().
// A single node with no relations is the zero-hop path.
struct PathValue {
    std::vector<std::uint32_t> nodes;
    std::vector<std::uint32_t> rels;
    bool operator==(const PathValue&) const = default;
    std::size_t hop_count() const { return rels.size(); }
};

// Cell value. The variant order is the cross-kind sort rank for the
// deterministic row ordering (nulls first, then scalars, then graph refs).
using Value = std::variant<std::monostate, std::int64_t, double, std::string,
                           EntityRef, RelationRef, PathValue>;

struct ExecStats {
    std::uint64_t rows_scanned = 0;
    std::uint64_t paths_expanded = 0;
    bool operator==(const ExecStats&) const = default;
};

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
    ExecStats stats;

    bool empty() const { return rows.empty(); }
    // Equality over columns and rows; stats are bookkeeping, not data.
    bool same_data(const ResultTable& other) const {
        return columns == other.columns && rows == other.rows;
    }
};

struct ExecLimits {
    int hop_cap = 5;
    std::uint64_t max_paths = 200000;
    std::uint64_t max_rows = 1000000;
    std::chrono::milliseconds timeout{30000};
};

struct ExecError {
    enum class Kind { unknown_entity, limit_exceeded, timeout, unsupported };
    Kind kind = Kind::unsupported;
    std::string message;
};

// Total order over values (graph-aware: entities order by id, relations by
// (src id, rel type, dst id, index), paths by (hop count, id/rel
// sequence)). Used for the deterministic fallback row ordering.
int compare_values(const graph::PropertyGraph& g, const Value& a, const Value& b);

// Renders a value for human-facing output: entities by id, relations as
// src -[rel]-> dst, paths as the full chain.
std::string value_to_string(const graph::PropertyGraph& g, const Value& v);

// Evaluates a parsed query. Pattern variables join across comma-separated
// and repeated MATCH patterns. Rows are ordered by ORDER BY when present,
// otherwise lexicographically under compare_values; LIMIT applies after
// ordering.
Result<ResultTable, ExecError> execute(const graph::PropertyGraph& graph,
                                       const cypher::CypherQuery& query,
                                       const ExecLimits& limits = {});

// One-hop neighbor expansion: columns [p, o], one row per outgoing edge of
// the entity, sorted by (rel type, neighbor id).
Result<ResultTable, ExecError> expand_neighborhood(const graph::PropertyGraph& graph,
                                                   const std::string& entity_id,
                                                   const ExecLimits& limits = {});

// Property equality filters applied to the entity reached after each hop;
// index 0 filters the start entity.
using HopFilters = std::map<std::size_t, std::vector<std::pair<std::string, Scalar>>>;

// Walks an exact relation chain from the start entities. One row per
// distinct traversal (multiplicities preserved); the single column is
// named v<chain length>, matching the equivalent rendered linear MATCH.
Result<ResultTable, ExecError> match_meta_path(const graph::PropertyGraph& graph,
                                               const std::vector<std::string>& start_ids,
                                               const std::vector<std::string>& rel_chain,
                                               const HopFilters& filters = {},
                                               const ExecLimits& limits = {});

using RelSequenceConstraint = std::function<bool(std::span<const std::string>)>;

// k shortest simple paths by hop count, ties broken by the entity-id
// sequence, then the relation-type sequence, then relation indices. Paths
// longer than limits.hop_cap are not considered. src == dst yields the
// single zero-hop path. The optional constraint filters on the full
// relation-type sequence of a candidate path.
Result<std::vector<PathValue>, ExecError> k_shortest_paths(
    const graph::PropertyGraph& graph, const std::string& src_id,
    const std::string& dst_id, int k,
    const RelSequenceConstraint& rel_constraint = nullptr,
    const ExecLimits& limits = {}, int min_hops = 0, int max_hops = -1);

// Line-delimited serialization: a header record with columns and stats,
// then one record per row.
std::string serialize_result(const graph::PropertyGraph& g, const ResultTable& t);

}  // namespace polyg::exec
