#pragma once

#include <string>
#include <vector>

#include "polyg/cypher/ast.hpp"
#include "polyg/graph/store.hpp"

namespace polyg::cypher {

// A schema violation is data, not a failure: callers decide whether to
// surface, repair or ignore it.
struct SchemaViolation {
    enum class Kind { unknown_label, unknown_rel_type, unknown_property, type_mismatch };
    Kind kind = Kind::unknown_label;
    std::string offending;
    // Byte span of the offending identifier within render(query).
    std::size_t begin = 0;
    std::size_t end = 0;
    // Nearest valid alternatives: everything within edit distance 3, or the
    // single closest name when nothing is that near.
    std::vector<std::string> suggestions;
    std::string message;
};

const char* to_string(SchemaViolation::Kind kind);

// Checks labels, relation types and property names against the schema.
// type_mismatch reports a name that exists in the schema but in the other
// category (a relation type used as a label or the reverse).
std::vector<SchemaViolation> validate(const CypherQuery& query,
                                      const graph::GraphSchema& schema);

}  // namespace polyg::cypher
