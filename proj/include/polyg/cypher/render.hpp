#pragma once

#include <string>

#include "polyg/cypher/ast.hpp"

namespace polyg::cypher {

// Canonical text form: uppercase keywords, single spaces, '=' for
// equality, backticked identifiers where needed. parse(render(q))
// reproduces q structurally.
std::string render(const CypherQuery& q);

std::string render(const MatchClause& m);
std::string render(const PathPattern& p);
std::string render(const Expr& e);
std::string render(const Projection& p);
std::string render(const Operand& o);

// Quotes an identifier with backticks when it is not a plain identifier.
std::string render_identifier(const std::string& name);

// Single-quoted string literal with escaping.
std::string render_string_literal(const std::string& value);

}  // namespace polyg::cypher
