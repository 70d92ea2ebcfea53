#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polyg/exec/executor.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"
#include "polyg/taxonomy/taxonomy.hpp"

namespace polyg::context {

// Grounding context assembled from a query result: an entity table, a
// relation table aggregated per (source, target) pair, and, for the two
// patterns that ask how entities are connected, the full reasoning paths.
//
// The rendered text is a pinned byte-exact format (it feeds prompt
// fingerprints): sections "Entities:", "Relations:", "Paths:" with
// fixed-width columns, rows ordered by entity id and by (source, relations,
// target) respectively. Relations synthesized during inverse
// materialization are shown in their original orientation.

struct EntityRow {
    std::string id;
    std::string type;
    std::string name;
    std::string attrs;
    bool operator==(const EntityRow&) const = default;
};

struct RelationRow {
    std::string src;  // display names, not ids
    std::string rels;
    std::string dst;
    std::string attrs;
    bool operator==(const RelationRow&) const = default;
};

struct ContextBundle {
    std::vector<EntityRow> entities;
    std::vector<RelationRow> relations;
    std::vector<std::string> paths;
    bool has_paths_section = false;
    std::size_t budget = 0;
    std::size_t truncated_rows = 0;
    std::string text;  // rendered bundle, size <= budget
};

inline constexpr std::size_t kDefaultBudget = 16000;

// Collects every entity, relation and path referenced by the result rows.
// Rows are dropped whole from the tail (paths first, then relations, then
// entities) until the rendered text fits the budget; dropping appends an
// explicit truncation marker. An empty result renders the "no facts
// retrieved" marker instead of empty tables. Results carrying only scalar
// cells render a "Values:" listing so aggregates are not lost.
ContextBundle build_bundle(const graph::PropertyGraph& g,
                           const exec::ResultTable& result,
                           taxonomy::Pattern pattern,
                           std::size_t budget = kDefaultBudget);

// One resolved plan step: the concrete sub-question and the short answer
// derived from its result. An empty answer renders as "no answer found".
struct StepRecord {
    std::string sub_question;
    std::string answer;
};

// Final answer prompt: the original question, every sub-question/answer
// pair in plan order, the supporting facts when given, and an instruction
// to answer only from the provided material.
std::vector<llm::Message> render_summary_prompt(
    const std::string& question, const std::vector<StepRecord>& steps,
    const std::optional<std::string>& facts = std::nullopt);

}  // namespace polyg::context
