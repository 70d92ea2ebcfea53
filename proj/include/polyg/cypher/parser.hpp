#pragma once

#include <string>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/cypher/ast.hpp"

namespace polyg::cypher {

struct ParseError {
    int line = 1;
    int column = 1;
    std::string message;
    // Token categories the parser would have accepted at the error point.
    std::vector<std::string> expected;

    std::string to_string() const;
};

// Parses one query. Total over arbitrary input: every failure is a located
// ParseError, never an abort. Structural violations (missing RETURN,
// unbound variable references, SHORTEST with k < 1 or more than one
// source-target pattern, WITH projections other than bare variables
// lacking an alias, a second WITH) are reported the same way.
Result<CypherQuery, ParseError> parse(const std::string& text);

}  // namespace polyg::cypher
