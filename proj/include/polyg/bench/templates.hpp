#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/cypher/ast.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/taxonomy/taxonomy.hpp"

namespace polyg::bench {

// A question template: text with [slot] placeholders, a selection query
// whose result columns bind the slots to graph entities, and (for
// relation-chain patterns only) an answer query with the slot ids spliced
// into its literals.
struct QuestionTemplate {
    std::string id;
    taxonomy::Pattern pattern = taxonomy::Pattern::sxx;
    std::string text;
    std::vector<std::string> slots;  // first-appearance order, distinct
    std::string selection_text;
    cypher::CypherQuery selection;
    // Present only for sp* and nested chain templates; placeholders sit
    // inside string literals, e.g. {id: '[paper title]'}.
    std::optional<std::string> answer_text;
};

struct TemplateFile {
    std::string domain;
    graph::GraphSchema schema;
    std::vector<QuestionTemplate> templates;
};

// Placeholders "[...]" in first-appearance order, deduplicated.
std::vector<std::string> extract_slots(const std::string& text);

// Replaces every "[name]" with values.at(name); unknown placeholders are
// left in place.
std::string substitute_slots(const std::string& text,
                             const std::map<std::string, std::string>& values);

// Loads one domain document: {"domain", "schema": {"entities", "relations"},
// "templates": [{"id", "pattern", "text", "selection", "answer"?}]}.
// Every embedded query must parse and validate against the declared
// schema; slots must be bound by selection columns; answer queries are
// only accepted on sp* and nested templates. Errors name the template and
// the violation.
Result<TemplateFile> load_templates(std::istream& in, const std::string& origin);
Result<TemplateFile> load_templates_file(const std::string& path);

}  // namespace polyg::bench
